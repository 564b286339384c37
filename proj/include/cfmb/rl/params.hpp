#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cfmb::rl {

struct ParamTensor {
  std::string name;
  std::vector<std::size_t> shape;
  // Row-major. Aligned storage keeps Eigen's vectorized reductions from
  // depending on where the heap happened to place the buffer.
  std::vector<double, Eigen::aligned_allocator<double>> values;

  std::size_t size() const { return values.size(); }
};

/// Ordered, named parameter arrays. Shapes are fixed once added.
class AgentParams {
 public:
  // Returns the index of the new tensor; values start at zero.
  std::size_t add(std::string name, std::vector<std::size_t> shape);

  std::size_t count() const { return tensors_.size(); }
  std::size_t total_size() const;
  const ParamTensor& tensor(std::size_t i) const { return tensors_[i]; }
  ParamTensor& tensor(std::size_t i) { return tensors_[i]; }
  const std::vector<ParamTensor>& tensors() const { return tensors_; }
  std::size_t index_of(const std::string& name) const;

  // Row-major 2-D view (rows = shape[0], cols = product of the rest).
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> matrix(std::size_t i);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> matrix(std::size_t i) const;
  Eigen::Map<Eigen::VectorXd> vector(std::size_t i);
  Eigen::Map<const Eigen::VectorXd> vector(std::size_t i) const;

  // Same names and shapes, all zeros.
  AgentParams zeros_like() const;
  void set_zero();
  bool same_layout(const AgentParams& other) const;
  bool all_finite() const;

  friend bool operator==(const AgentParams& a, const AgentParams& b);

 private:
  std::vector<ParamTensor> tensors_;
};

/// Element-wise mean; every set must share names and shapes.
AgentParams fedavg(std::span<const AgentParams* const> sets);
AgentParams fedavg(const std::vector<AgentParams>& sets);

/// Largest absolute element difference between two same-layout sets.
double max_abs_diff(const AgentParams& a, const AgentParams& b);

// Binary container: magic, version, tensor count, then for each tensor its
// name, shape and raw IEEE-754 doubles. Round-trips bit-exactly.
void write_params(std::ostream& os, const AgentParams& p);
AgentParams read_params(std::istream& is);
void save_params(const std::string& path, const AgentParams& p);
AgentParams load_params(const std::string& path);

}  // namespace cfmb::rl
