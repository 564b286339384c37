#include <doctest.h>

#include <memory>
#include <set>

#include "cfmb/errors.hpp"
#include "cfmb/scheduling.hpp"

using namespace cfmb;

namespace {

// Hand-built request lists; every user asks UAV 0 for the given tiles.
std::shared_ptr<const RequestSet> requests_of(const std::vector<std::vector<std::size_t>>& local_indices) {
  std::vector<std::vector<TileId>> per_user;
  for (const auto& list : local_indices) {
    std::vector<TileId> tiles;
    for (auto i : list) tiles.push_back(TileId::from_global(i));
    per_user.push_back(tiles);
  }
  return std::make_shared<RequestSet>(per_user, 1);
}

std::vector<std::vector<double>> flat(double v) { return {std::vector<double>(kTilesPerUav, v)}; }

}  // namespace

TEST_SUITE("scheduling") {

TEST_CASE("P-PF priority") {
  DecodeState s(requests_of({{7}, {7}, {7}, {9}, {9}, {9}, {9}}));
  PpfHistory h(1);
  CHECK(ppf_priority(TileId::from_global(7), s, h) == doctest::Approx(3.0));
  CHECK(ppf_priority(TileId::from_global(8), s, h) == 0.0);
  h.add(TileId::from_global(9), 4.0);
  CHECK(ppf_priority(TileId::from_global(9), s, h) == doctest::Approx(0.8));
}

TEST_CASE("a fully decoded tile has zero priority") {
  DecodeState s(requests_of({{3}, {3}}));
  PpfHistory h(1);
  const auto t = TileId::from_global(3);
  update_decode_state(s, 0, t, true, 0);
  CHECK(ppf_priority(t, s, h) == doctest::Approx(1.0));
  update_decode_state(s, 1, t, true, 0);
  CHECK(ppf_priority(t, s, h) == 0.0);
}

TEST_CASE("history counts requesting users holding a decoded copy") {
  DecodeState s(requests_of({{3, 4}, {3}}));
  PpfHistory h(1);
  update_decode_state(s, 0, TileId::from_global(3), true, 0);
  update_decode_state(s, 1, TileId::from_global(3), true, 0);
  h.record_slot(s);
  h.record_slot(s);
  CHECK(h.count(TileId::from_global(3)) == 4.0);
  CHECK(h.count(TileId::from_global(4)) == 0.0);
}

TEST_CASE("top-k selection") {
  std::vector<std::vector<double>> p = flat(0.0);
  p[0][5] = 4.0;
  p[0][60] = 9.0;
  p[0][2] = 1.0;
  const auto s = select_top_tiles(p, 3);
  REQUIRE(s.tiles[0].size() == 3);
  CHECK(s.tiles[0][0].local_index() == 60);
  CHECK(s.tiles[0][1].local_index() == 5);
  CHECK(s.tiles[0][2].local_index() == 2);

  const auto eq = select_top_tiles(flat(1.0), 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(eq.tiles[0][i].local_index() == i);

  const auto all = select_top_tiles(flat(2.0), kTilesPerUav);
  CHECK(all.tiles[0].size() == kTilesPerUav);

  std::vector<std::vector<double>> dec = flat(0.0);
  for (std::size_t i = 0; i < kTilesPerUav; ++i) dec[0][i] = 100.0 - static_cast<double>(i);
  const auto first = select_top_tiles(dec, 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(first.tiles[0][i].local_index() == i);
}

TEST_CASE("padding uses fallback popularity then tile order") {
  std::vector<std::vector<double>> p = flat(0.0), pop = flat(0.0);
  p[0][40] = 1.0;
  pop[0][30] = 5.0;
  pop[0][20] = 2.0;
  const auto s = select_top_tiles(p, 4, &pop);
  CHECK(s.tiles[0][0].local_index() == 40);
  CHECK(s.tiles[0][1].local_index() == 30);
  CHECK(s.tiles[0][2].local_index() == 20);
  CHECK(s.tiles[0][3].local_index() == 0);
}

TEST_CASE("output size is k per UAV for random inputs") {
  Rng rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::vector<double>> p(3, std::vector<double>(kTilesPerUav));
    for (auto& row : p)
      for (auto& x : row) x = u(rng) > 0.5 ? u(rng) : 0.0;
    const std::size_t k = 1 + static_cast<std::size_t>(t % 20);
    const auto s = select_top_tiles(p, k);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(s.tiles[i].size() == k);
      std::set<TileId> uniq(s.tiles[i].begin(), s.tiles[i].end());
      CHECK(uniq.size() == k);
      for (const auto& tile : s.tiles[i]) CHECK(tile.uav == i);
    }
  }
  CHECK_THROWS(select_top_tiles(flat(1.0), 0));
}

TEST_CASE("P-PF scheduling is deterministic") {
  Rng rng(2);
  std::vector<Viewpoint> vps;
  std::vector<std::size_t> owner;
  for (int v = 0; v < 30; ++v) {
    vps.push_back(generate_viewpoint(rng));
    owner.push_back(static_cast<std::size_t>(v % 2));
  }
  auto rs = std::make_shared<RequestSet>(make_requests(vps, owner, 2));
  DecodeState s(rs);
  PpfHistory h(2);
  const auto a = ppf_schedule(s, h, 10);
  const auto b = ppf_schedule(s, h, 10);
  CHECK(a.tiles == b.tiles);
  CHECK(a.priority == b.priority);
}

TEST_CASE("popularity maps") {
  DecodeState empty(requests_of({}));
  const auto z = popularity_map(empty);
  for (double x : z.data) CHECK(x == 0.0);

  DecodeState all(requests_of({{12}, {12}, {12}}));
  CHECK(popularity_map(all).at(0, 0, 1, 0) == 1.0);

  // Tile 50 requested by 8 users, tile 51 by 2 and tile 52 by 3.
  DecodeState s(requests_of({{50, 51}, {50, 51}, {50, 52}, {50, 52}, {50, 52}, {50}, {50}, {50}}));
  const auto m = popularity_map(s);
  CHECK(m.at(0, 0, 4, 2) == 1.0);
  CHECK(m.at(0, 0, 4, 3) == 0.25);
  CHECK(m.at(0, 0, 4, 4) == 0.375);
}

TEST_CASE("broken chains count as re-transmissions") {
  DecodeState s(requests_of({{5}, {5}}));
  const auto t = TileId::from_global(5);
  update_decode_state(s, 0, t, true, 0);
  s.advance_frame();
  update_decode_state(s, 1, t, true, 1);  // received, but no I copy
  const auto m = popularity_map(s);
  CHECK(m.at(0, 0, 0, 5) == 1.0);  // user 0 still pending normally
  CHECK(m.at(0, 1, 0, 5) == 1.0);  // user 1 needs a re-transmission
}

}
