#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ldahash/matrix.hpp"

namespace ldahash {

/// Packed binary codes: one bit per (item, bit) pair, LSB-first inside
/// 64-bit words, ceil(code_bits/64) words per item. Stored bit 1 means code
/// value +1, bit 0 means -1. Padding bits past code_bits stay 0.
struct BinaryCodes {
    std::int64_t item_count = 0;
    int code_bits = 0;
    std::vector<std::uint64_t> words;
    std::vector<std::int64_t> item_ids;

    int words_per_item() const { return (code_bits + 63) / 64; }

    bool bit(std::int64_t item, int pos) const {
        const auto word = static_cast<std::size_t>(item) * words_per_item() + pos / 64;
        return (words[word] >> (pos % 64)) & 1u;
    }

    void set_bit(std::int64_t item, int pos) {
        const auto word = static_cast<std::size_t>(item) * words_per_item() + pos / 64;
        words[word] |= std::uint64_t{1} << (pos % 64);
    }

    std::span<const std::uint64_t> item_words(std::int64_t item) const {
        return {words.data() + static_cast<std::size_t>(item) * words_per_item(),
                static_cast<std::size_t>(words_per_item())};
    }
};

/// Quantize an r x n value matrix: value >= 0 maps to bit 1 (+1), value < 0
/// to bit 0 (-1). Item ids default to 0..n-1.
BinaryCodes sign_quantize(const Matrix& values);
BinaryCodes sign_quantize(const Matrix& values, std::vector<std::int64_t> item_ids);

/// Number of differing bits between two equal-width codes.
int hamming(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
int hamming(const BinaryCodes& a, std::int64_t i, const BinaryCodes& b, std::int64_t j);

/// Immutable gallery wrapper answering radius lookups and full rankings,
/// both ordered by (distance, item_id) ascending.
class HammingIndex {
public:
    explicit HammingIndex(BinaryCodes gallery);

    const BinaryCodes& gallery() const { return gallery_; }

    /// Gallery positions ordered by (distance, item_id); the basis for both
    /// public queries. Distances go into `distances` (indexed by position)
    /// when non-null.
    std::vector<std::int64_t> rank_positions(std::span<const std::uint64_t> query,
                                             std::vector<int>* distances = nullptr) const;

    std::vector<std::int64_t> rank_by_hamming(std::span<const std::uint64_t> query) const;
    std::vector<std::int64_t> lookup_radius(std::span<const std::uint64_t> query,
                                            int radius) const;

private:
    BinaryCodes gallery_;
    std::vector<std::int64_t> positions_by_id_;
};

/// Codes file: "DLDH" magic, u32 LE version, i64 LE item count, i32 LE code
/// bits, item words (u64 LE each), then item ids (i64 LE each).
void write_codes_file(const BinaryCodes& codes, const std::string& path);
BinaryCodes read_codes_file(const std::string& path);

}  // namespace ldahash
