#include "ucode/romgrid.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

#include "ucode/error.hpp"

namespace ucode {

BitGrid::BitGrid(std::size_t r, std::size_t c) : rows(r), cols(c), bits(r * c, 0) {}

BitGrid parse_grid(std::string_view text, bool flip_convention) {
  BitGrid g;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (g.rows == 0) {
      g.cols = line.size();
    } else if (line.size() != g.cols) {
      throw Error(ErrorCode::Syntax,
                  fmt::format("line {}: row has {} columns, expected {}", line_no, line.size(), g.cols));
    }
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (line[c] != '0' && line[c] != '1') {
        throw Error(ErrorCode::Syntax, fmt::format("line {}: unexpected character '{}'", line_no, line[c]));
      }
      g.bits.push_back(static_cast<std::uint8_t>((line[c] == '1') != flip_convention));
    }
    ++g.rows;
  }
  return g;
}

std::string format_grid(const BitGrid& g) {
  std::string out;
  out.reserve(g.rows * (g.cols + 1));
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) out += g.at(r, c) ? '1' : '0';
    out += '\n';
  }
  return out;
}

BitGrid normalize_columns(const BitGrid& grid, unsigned inverted_parity) {
  BitGrid out = grid;
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      if (c % 2 == inverted_parity % 2) out.set(r, c, !grid.at(r, c));
    }
  }
  return out;
}

BitGrid apply_segment_inversion(const BitGrid& grid, std::span<const std::uint8_t> segment_parity) {
  const auto& b = grid.segment_boundaries;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] == 0 || b[i] >= grid.cols || (i > 0 && b[i] <= b[i - 1])) {
      throw Error(ErrorCode::InvalidBoundary,
                  fmt::format("segment boundary {} must be increasing and inside (0, {})", b[i], grid.cols));
    }
  }
  const std::size_t segments = b.size() + 1;
  if (!segment_parity.empty() && segment_parity.size() != segments) {
    throw Error(ErrorCode::InvalidBoundary,
                fmt::format("{} segment parities given for {} segments", segment_parity.size(), segments));
  }

  BitGrid out = grid;
  std::size_t segment = 0;
  std::size_t origin = 0;
  for (std::size_t c = 0; c < grid.cols; ++c) {
    if (segment < b.size() && c == b[segment]) {
      origin = c;
      ++segment;
    }
    const unsigned parity = segment_parity.empty() ? static_cast<unsigned>((segment + 1) % 2) : segment_parity[segment] % 2;
    if ((c - origin) % 2 != parity) continue;
    for (std::size_t r = 0; r < grid.rows; ++r) out.set(r, c, !grid.at(r, c));
  }
  return out;
}

namespace {

std::vector<std::size_t> resolve_order(std::span<const std::size_t> order, std::size_t subarrays) {
  if (order.empty()) {
    std::vector<std::size_t> identity(subarrays);
    std::iota(identity.begin(), identity.end(), 0);
    return identity;
  }
  std::vector<std::size_t> sorted(order.begin(), order.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted.size() != subarrays || sorted[i] != i) {
      throw Error(ErrorCode::Alignment,
                  fmt::format("subarray order must be a permutation of 0..{}", subarrays == 0 ? 0 : subarrays - 1));
    }
  }
  return {order.begin(), order.end()};
}

void check_alignment(std::size_t cols, std::size_t subarrays) {
  if (subarrays == 0) throw Error(ErrorCode::Alignment, "subarray count must be positive");
  if (cols % subarrays != 0) {
    throw Error(ErrorCode::Alignment, fmt::format("{} columns do not split into {} subarrays", cols, subarrays));
  }
  if (cols % 64 != 0) throw Error(ErrorCode::Alignment, fmt::format("{} columns are not a multiple of 64", cols));
}

// Grid column holding stream bit k.
std::size_t source_column(std::size_t k, std::size_t width, std::span<const std::size_t> order) {
  const std::size_t s = order.size();
  return order[k % s] * width + k / s;
}

}  // namespace

std::vector<std::uint64_t> interleave_subarrays(const BitGrid& grid, std::span<const std::size_t> order) {
  check_alignment(grid.cols, grid.subarray_count);
  const auto ord = resolve_order(order, grid.subarray_count);
  const std::size_t width = grid.cols / grid.subarray_count;
  const std::size_t words_per_row = grid.cols / 64;
  std::vector<std::uint64_t> words(grid.rows * words_per_row, 0);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t k = 0; k < grid.cols; ++k) {
      if (grid.at(r, source_column(k, width, ord))) words[r * words_per_row + k / 64] |= std::uint64_t{1} << (k % 64);
    }
  }
  return words;
}

BitGrid deinterleave_words(std::span<const std::uint64_t> words, std::size_t cols, std::size_t subarray_count,
                           std::span<const std::size_t> order) {
  check_alignment(cols, subarray_count);
  const auto ord = resolve_order(order, subarray_count);
  const std::size_t words_per_row = cols / 64;
  if (words.size() % words_per_row != 0) {
    throw Error(ErrorCode::Alignment,
                fmt::format("{} words do not fill rows of {} words", words.size(), words_per_row));
  }
  BitGrid g(words.size() / words_per_row, cols);
  g.subarray_count = subarray_count;
  const std::size_t width = cols / subarray_count;
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t k = 0; k < cols; ++k) {
      g.set(r, source_column(k, width, ord), (words[r * words_per_row + k / 64] >> (k % 64)) & 1u);
    }
  }
  return g;
}

namespace {

BitGrid invert(BitGrid g, const GridPipeline& config) {
  if (config.segment_boundaries.empty()) return normalize_columns(g, config.inverted_parity);
  g.segment_boundaries = config.segment_boundaries;
  return apply_segment_inversion(g, config.segment_parity);
}

}  // namespace

std::vector<std::uint64_t> run_pipeline(const BitGrid& grid, const GridPipeline& config) {
  BitGrid g = invert(grid, config);
  g.subarray_count = config.subarray_count;
  return interleave_subarrays(g, config.order);
}

BitGrid synthesize_grid(std::span<const std::uint64_t> words, std::size_t cols, const GridPipeline& config) {
  BitGrid g = deinterleave_words(words, cols, config.subarray_count, config.order);
  BitGrid out = invert(g, config);
  out.segment_boundaries = config.segment_boundaries;
  out.subarray_count = config.subarray_count;
  return out;
}

}  // namespace ucode
