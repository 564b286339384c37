#include "cfmb/rl/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "cfmb/errors.hpp"

namespace cfmb::rl {

namespace {

constexpr char kMagic[8] = {'C', 'F', 'M', 'B', 'P', 'A', 'R', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("read_params: truncated checkpoint");
  return v;
}

std::size_t rows_of(const ParamTensor& t) { return t.shape.empty() ? 1 : t.shape[0]; }
std::size_t cols_of(const ParamTensor& t) { return t.values.size() / std::max<std::size_t>(1, rows_of(t)); }

}  // namespace

std::size_t AgentParams::add(std::string name, std::vector<std::size_t> shape) {
  for (const auto& t : tensors_)
    if (t.name == name) throw std::invalid_argument("AgentParams: duplicate tensor name " + name);
  const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  tensors_.push_back({std::move(name), std::move(shape), decltype(ParamTensor::values)(n, 0.0)});
  return tensors_.size() - 1;
}

std::size_t AgentParams::total_size() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

std::size_t AgentParams::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (tensors_[i].name == name) return i;
  throw std::out_of_range("AgentParams: no tensor named " + name);
}

Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> AgentParams::matrix(std::size_t i) {
  auto& t = tensors_[i];
  return {t.values.data(), static_cast<Eigen::Index>(rows_of(t)), static_cast<Eigen::Index>(cols_of(t))};
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> AgentParams::matrix(
    std::size_t i) const {
  const auto& t = tensors_[i];
  return {t.values.data(), static_cast<Eigen::Index>(rows_of(t)), static_cast<Eigen::Index>(cols_of(t))};
}

Eigen::Map<Eigen::VectorXd> AgentParams::vector(std::size_t i) {
  auto& t = tensors_[i];
  return {t.values.data(), static_cast<Eigen::Index>(t.values.size())};
}

Eigen::Map<const Eigen::VectorXd> AgentParams::vector(std::size_t i) const {
  const auto& t = tensors_[i];
  return {t.values.data(), static_cast<Eigen::Index>(t.values.size())};
}

AgentParams AgentParams::zeros_like() const {
  AgentParams z = *this;
  z.set_zero();
  return z;
}

void AgentParams::set_zero() {
  for (auto& t : tensors_) std::fill(t.values.begin(), t.values.end(), 0.0);
}

bool AgentParams::same_layout(const AgentParams& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (tensors_[i].name != other.tensors_[i].name || tensors_[i].shape != other.tensors_[i].shape) return false;
  return true;
}

bool AgentParams::all_finite() const {
  for (const auto& t : tensors_)
    for (double v : t.values)
      if (!std::isfinite(v)) return false;
  return true;
}

bool operator==(const AgentParams& a, const AgentParams& b) {
  if (!a.same_layout(b)) return false;
  for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
    const auto& x = a.tensors_[i].values;
    const auto& y = b.tensors_[i].values;
    if (std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

AgentParams fedavg(std::span<const AgentParams* const> sets) {
  if (sets.empty()) throw std::invalid_argument("fedavg: no parameter sets");
  for (const auto* s : sets)
    if (!s->same_layout(*sets[0])) throw StructuralError("fedavg: parameter layouts differ");
  AgentParams out = sets[0]->zeros_like();
  const double inv = 1.0 / static_cast<double>(sets.size());
  for (std::size_t i = 0; i < out.count(); ++i) {
    auto& dst = out.tensor(i).values;
    for (std::size_t j = 0; j < dst.size(); ++j) {
      double acc = 0.0;
      for (const auto* s : sets) acc += s->tensor(i).values[j];
      dst[j] = acc * inv;
    }
  }
  return out;
}

AgentParams fedavg(const std::vector<AgentParams>& sets) {
  std::vector<const AgentParams*> ptrs;
  for (const auto& s : sets) ptrs.push_back(&s);
  return fedavg(std::span<const AgentParams* const>(ptrs));
}

double max_abs_diff(const AgentParams& a, const AgentParams& b) {
  if (!a.same_layout(b)) throw StructuralError("max_abs_diff: parameter layouts differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.count(); ++i)
    for (std::size_t j = 0; j < a.tensor(i).size(); ++j)
      m = std::max(m, std::abs(a.tensor(i).values[j] - b.tensor(i).values[j]));
  return m;
}

void write_params(std::ostream& os, const AgentParams& p) {
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kVersion);
  put<std::uint64_t>(os, p.count());
  for (const auto& t : p.tensors()) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put<std::uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("write_params: write failed");
}

AgentParams read_params(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw std::runtime_error("read_params: bad magic");
  if (get<std::uint32_t>(is) != kVersion) throw std::runtime_error("read_params: unsupported version");
  const auto n = get<std::uint64_t>(is);
  AgentParams p;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto len = get<std::uint32_t>(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    const auto ndim = get<std::uint32_t>(is);
    std::vector<std::size_t> shape;
    for (std::uint32_t d = 0; d < ndim; ++d) shape.push_back(static_cast<std::size_t>(get<std::uint64_t>(is)));
    const auto idx = p.add(name, shape);
    auto& vals = p.tensor(idx).values;
    is.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size() * sizeof(double)));
    if (!is) throw std::runtime_error("read_params: truncated checkpoint");
  }
  return p;
}

void save_params(const std::string& path, const AgentParams& p) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_params: cannot open " + path);
  write_params(os, p);
}

AgentParams load_params(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_params: cannot open " + path);
  return read_params(is);
}

}  // namespace cfmb::rl
