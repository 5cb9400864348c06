#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support.hpp"
#include "ucode/error.hpp"
#include "ucode/romgrid.hpp"
#include "ucode/rtl.hpp"

using namespace ucode;

namespace {

BitGrid random_grid(std::mt19937& rng, std::size_t rows, std::size_t cols) {
  BitGrid g(rows, cols);
  for (auto& b : g.bits) b = rng() & 1;
  return g;
}

}  // namespace

TEST_CASE("grid text format") {
  const auto g = parse_grid("0101\n1100\n");
  CHECK(g.rows == 2);
  CHECK(g.cols == 4);
  CHECK(g.at(0, 1));
  CHECK_FALSE(g.at(1, 3));
  CHECK(format_grid(g) == "0101\n1100\n");
  CHECK(parse_grid("0101\n1100\n", true) == parse_grid("1010\n0011\n"));
  CHECK_THROWS_AS(parse_grid("010\n11\n"), Error);
  CHECK_THROWS_AS(parse_grid("01x0\n"), Error);
}

TEST_CASE("column normalization") {
  BitGrid ones(2, 6);
  std::fill(ones.bits.begin(), ones.bits.end(), 1);
  const auto even = normalize_columns(ones, 0);
  for (std::size_t c = 0; c < 6; ++c) CHECK(even.at(0, c) == (c % 2 == 1));
  const auto odd = normalize_columns(ones);
  for (std::size_t c = 0; c < 6; ++c) CHECK(odd.at(1, c) == (c % 2 == 0));

  std::mt19937 rng(5);
  const auto g = random_grid(rng, 7, 33);
  CHECK(normalize_columns(normalize_columns(g)) == g);
}

TEST_CASE("segment inversion uses local parity") {
  BitGrid g(1, 8);
  g.segment_boundaries = {3};
  const std::vector<std::uint8_t> parity{1, 1};
  const auto out = apply_segment_inversion(g, parity);
  CHECK(format_grid(out) == "01001010\n");
  const auto alternating = apply_segment_inversion(g);
  CHECK(format_grid(alternating) == "01010101\n");
  CHECK(apply_segment_inversion(out, parity) == g);

  g.segment_boundaries = {5, 3};
  CHECK_THROWS_AS(apply_segment_inversion(g), Error);
  g.segment_boundaries = {8};
  CHECK_THROWS_AS(apply_segment_inversion(g), Error);
  g.segment_boundaries = {3};
  const std::vector<std::uint8_t> too_many{1, 0, 1};
  CHECK_THROWS_AS(apply_segment_inversion(g, too_many), Error);
}

TEST_CASE("single row of eight subarrays makes one word") {
  BitGrid g(1, 64);
  g.subarray_count = 8;
  // Subarray j, local column i sits at grid column 8j + i and lands in stream bit 8i + j.
  g.set(0, 8 * 3 + 2, true);
  const auto words = interleave_subarrays(g);
  REQUIRE(words.size() == 1);
  CHECK(words[0] == std::uint64_t{1} << (8 * 2 + 3));

  const std::vector<std::size_t> order{7, 6, 5, 4, 3, 2, 1, 0};
  CHECK(interleave_subarrays(g, order) != words);
  CHECK(deinterleave_words(words, 64, 8) == g);
}

TEST_CASE("alignment errors") {
  BitGrid g(1, 96);
  g.subarray_count = 3;
  CHECK_THROWS_AS(interleave_subarrays(g), Error);
  BitGrid h(1, 64);
  h.subarray_count = 3;
  CHECK_THROWS_AS(interleave_subarrays(h), Error);
  h.subarray_count = 4;
  const std::vector<std::size_t> not_perm{0, 1, 1, 3};
  CHECK_THROWS_AS(interleave_subarrays(h, not_perm), Error);
}

TEST_CASE("synthetic grid from assembled triads decodes back") {
  const auto update = rtl::make_update(rtl::assemble_text(testing::fixture("div_counter.rtl")));
  std::vector<std::uint64_t> words;
  for (const auto& t : update.triads) {
    for (const auto& m : t.insns) words.push_back(encode_microinstruction(m));
  }
  GridPipeline config;
  config.segment_boundaries = {16, 40};
  config.subarray_count = 8;
  config.order = {3, 1, 4, 0, 6, 2, 7, 5};
  const auto grid = synthesize_grid(words, 64, config);
  const auto back = run_pipeline(grid, config);
  REQUIRE(back == words);
  std::size_t i = 0;
  for (const auto& t : update.triads) {
    for (const auto& m : t.insns) CHECK(decode_microinstruction(back[i++]) == m);
  }
}

TEST_CASE("pipeline round trip over random configurations") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    GridPipeline config;
    const std::size_t subarrays = std::size_t{1} << (rng() % 4);
    const std::size_t cols = 64 * (1 + rng() % 3);
    config.subarray_count = subarrays;
    config.inverted_parity = rng() % 2;
    const std::size_t cuts = rng() % 4;
    for (std::size_t c = 1; c < cols && config.segment_boundaries.size() < cuts; c += 1 + rng() % 40) {
      config.segment_boundaries.push_back(c);
    }
    if (rng() % 2) {
      for (std::size_t s = 0; s <= config.segment_boundaries.size(); ++s) config.segment_parity.push_back(rng() % 2);
    }
    config.order.resize(subarrays);
    std::iota(config.order.begin(), config.order.end(), 0);
    std::shuffle(config.order.begin(), config.order.end(), rng);

    std::vector<std::uint64_t> words((cols / 64) * (1 + rng() % 5));
    for (auto& w : words) w = (std::uint64_t{rng()} << 32) | rng();
    CHECK(run_pipeline(synthesize_grid(words, cols, config), config) == words);
  }
}
