#pragma once

// Turns a bit matrix read off a mask ROM into 64-bit words: undo the
// alternating column inversion (globally or per segment), then interleave
// the column subarrays into words.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ucode {

struct BitGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0 or 1
  std::vector<std::size_t> segment_boundaries;  // columns that start a new segment
  std::size_t subarray_count = 1;

  BitGrid() = default;
  BitGrid(std::size_t rows, std::size_t cols);

  bool at(std::size_t row, std::size_t col) const { return bits[row * cols + col] != 0; }
  void set(std::size_t row, std::size_t col, bool v) { bits[row * cols + col] = v ? 1 : 0; }

  friend bool operator==(const BitGrid&, const BitGrid&) = default;
};

/// One row per line of '0'/'1'. With `flip_convention` every bit is
/// complemented on input. Throws Error{Syntax} on ragged rows or other
/// characters.
BitGrid parse_grid(std::string_view text, bool flip_convention = false);
std::string format_grid(const BitGrid& grid);

/// Complements every column c with c % 2 == inverted_parity.
BitGrid normalize_columns(const BitGrid& grid, unsigned inverted_parity = 1);

/// Like normalize_columns, but the column index restarts at each segment
/// boundary and each segment has its own inverted parity. An empty
/// `segment_parity` alternates 1, 0, 1, ... across segments. Throws
/// Error{InvalidBoundary}.
BitGrid apply_segment_inversion(const BitGrid& grid, std::span<const std::uint8_t> segment_parity = {});

/// Stream bit k of a row comes from subarray order[k % S], local column
/// k / S; bits fill words LSB first. An empty `order` is 0..S-1. Throws
/// Error{Alignment} unless cols is a multiple of S and of 64.
std::vector<std::uint64_t> interleave_subarrays(const BitGrid& grid, std::span<const std::size_t> order = {});

/// Inverse of interleave_subarrays for a grid of `cols` columns.
BitGrid deinterleave_words(std::span<const std::uint64_t> words, std::size_t cols, std::size_t subarray_count,
                           std::span<const std::size_t> order = {});

struct GridPipeline {
  unsigned inverted_parity = 1;
  std::vector<std::size_t> segment_boundaries;  // empty: one global inversion
  std::vector<std::uint8_t> segment_parity;
  std::size_t subarray_count = 1;
  std::vector<std::size_t> order;
};

/// Inversion (global or segmented) followed by interleaving.
std::vector<std::uint64_t> run_pipeline(const BitGrid& grid, const GridPipeline& config);

/// Builds the grid that run_pipeline maps back to `words`.
BitGrid synthesize_grid(std::span<const std::uint64_t> words, std::size_t cols, const GridPipeline& config);

}  // namespace ucode
