#include "ldahash/codes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "ldahash/errors.hpp"

namespace ldahash {

namespace {

constexpr char kMagic[4] = {'D', 'L', 'D', 'H'};
constexpr std::uint32_t kFormatVersion = 1;

void append_le(std::string& out, std::uint64_t value, int bytes) {
    for (int b = 0; b < bytes; ++b) {
        out.push_back(static_cast<char>((value >> (8 * b)) & 0xff));
    }
}

std::uint64_t read_le(const unsigned char* p, int bytes) {
    std::uint64_t value = 0;
    for (int b = 0; b < bytes; ++b) {
        value |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    }
    return value;
}

}  // namespace

BinaryCodes sign_quantize(const Matrix& values) {
    std::vector<std::int64_t> ids(values.cols());
    std::iota(ids.begin(), ids.end(), std::int64_t{0});
    return sign_quantize(values, std::move(ids));
}

BinaryCodes sign_quantize(const Matrix& values, std::vector<std::int64_t> item_ids) {
    if (item_ids.size() != values.cols()) {
        throw DimensionError("sign_quantize: id count does not match item count");
    }
    values.require_finite("sign_quantize input");
    BinaryCodes codes;
    codes.item_count = static_cast<std::int64_t>(values.cols());
    codes.code_bits = static_cast<int>(values.rows());
    codes.item_ids = std::move(item_ids);
    codes.words.assign(static_cast<std::size_t>(codes.item_count) * codes.words_per_item(), 0);
    for (std::int64_t item = 0; item < codes.item_count; ++item) {
        for (int pos = 0; pos < codes.code_bits; ++pos) {
            if (values(static_cast<std::size_t>(pos), static_cast<std::size_t>(item)) >= 0.0) {
                codes.set_bit(item, pos);
            }
        }
    }
    return codes;
}

int hamming(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    if (a.size() != b.size()) {
        throw DimensionError("hamming: code widths disagree");
    }
    int distance = 0;
    for (std::size_t w = 0; w < a.size(); ++w) {
        distance += std::popcount(a[w] ^ b[w]);
    }
    return distance;
}

int hamming(const BinaryCodes& a, std::int64_t i, const BinaryCodes& b, std::int64_t j) {
    if (a.code_bits != b.code_bits) {
        throw DimensionError("hamming: code widths disagree");
    }
    return hamming(a.item_words(i), b.item_words(j));
}

HammingIndex::HammingIndex(BinaryCodes gallery) : gallery_(std::move(gallery)) {
    positions_by_id_.resize(static_cast<std::size_t>(gallery_.item_count));
    std::iota(positions_by_id_.begin(), positions_by_id_.end(), std::int64_t{0});
    std::stable_sort(positions_by_id_.begin(), positions_by_id_.end(),
                     [this](std::int64_t lhs, std::int64_t rhs) {
                         return gallery_.item_ids[static_cast<std::size_t>(lhs)] <
                                gallery_.item_ids[static_cast<std::size_t>(rhs)];
                     });
}

std::vector<std::int64_t> HammingIndex::rank_positions(std::span<const std::uint64_t> query,
                                                       std::vector<int>* distances) const {
    if (query.size() != static_cast<std::size_t>(gallery_.words_per_item())) {
        throw DimensionError("rank: query code width does not match gallery");
    }
    const std::int64_t n = gallery_.item_count;
    std::vector<int> dist(static_cast<std::size_t>(n));
    for (std::int64_t pos = 0; pos < n; ++pos) {
        dist[static_cast<std::size_t>(pos)] = hamming(query, gallery_.item_words(pos));
    }
    // Counting sort over distances; scanning positions in item-id order makes
    // every bucket id-ascending, so the concatenation is (distance, id) order.
    std::vector<std::int64_t> bucket_counts(static_cast<std::size_t>(gallery_.code_bits) + 2, 0);
    for (int d : dist) ++bucket_counts[static_cast<std::size_t>(d) + 1];
    for (std::size_t d = 1; d < bucket_counts.size(); ++d) {
        bucket_counts[d] += bucket_counts[d - 1];
    }
    std::vector<std::int64_t> ranking(static_cast<std::size_t>(n));
    for (std::int64_t pos : positions_by_id_) {
        const int d = dist[static_cast<std::size_t>(pos)];
        ranking[static_cast<std::size_t>(bucket_counts[static_cast<std::size_t>(d)]++)] = pos;
    }
    if (distances != nullptr) *distances = std::move(dist);
    return ranking;
}

std::vector<std::int64_t> HammingIndex::rank_by_hamming(
    std::span<const std::uint64_t> query) const {
    std::vector<std::int64_t> ranking = rank_positions(query);
    std::vector<std::int64_t> ids(ranking.size());
    for (std::size_t k = 0; k < ranking.size(); ++k) {
        ids[k] = gallery_.item_ids[static_cast<std::size_t>(ranking[k])];
    }
    return ids;
}

std::vector<std::int64_t> HammingIndex::lookup_radius(std::span<const std::uint64_t> query,
                                                      int radius) const {
    if (radius < 0) throw ValidationError("lookup_radius: radius must be >= 0");
    std::vector<int> distances;
    const std::vector<std::int64_t> ranking = rank_positions(query, &distances);
    std::vector<std::int64_t> ids;
    for (std::int64_t pos : ranking) {
        if (distances[static_cast<std::size_t>(pos)] > radius) break;
        ids.push_back(gallery_.item_ids[static_cast<std::size_t>(pos)]);
    }
    return ids;
}

void write_codes_file(const BinaryCodes& codes, const std::string& path) {
    std::string buffer;
    buffer.reserve(24 + codes.words.size() * 8 + codes.item_ids.size() * 8);
    buffer.append(kMagic, sizeof(kMagic));
    append_le(buffer, kFormatVersion, 4);
    append_le(buffer, static_cast<std::uint64_t>(codes.item_count), 8);
    append_le(buffer, static_cast<std::uint64_t>(codes.code_bits), 4);
    for (std::uint64_t word : codes.words) append_le(buffer, word, 8);
    for (std::int64_t id : codes.item_ids) {
        append_le(buffer, static_cast<std::uint64_t>(id), 8);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open codes file for writing: " + path);
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw ValidationError("failed writing codes file: " + path);
}

BinaryCodes read_codes_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open codes file: " + path);
    std::string buffer((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(buffer.data());
    const std::size_t size = buffer.size();
    if (size < 20 || std::memcmp(p, kMagic, sizeof(kMagic)) != 0) {
        throw ParseError("codes file: bad magic in " + path);
    }
    const auto version = static_cast<std::uint32_t>(read_le(p + 4, 4));
    if (version != kFormatVersion) {
        throw ParseError("codes file: unsupported format version " + std::to_string(version));
    }
    BinaryCodes codes;
    codes.item_count = static_cast<std::int64_t>(read_le(p + 8, 8));
    codes.code_bits = static_cast<int>(read_le(p + 16, 4));
    if (codes.item_count < 0 || codes.code_bits <= 0) {
        throw ParseError("codes file: invalid header counts in " + path);
    }
    const std::size_t word_count =
        static_cast<std::size_t>(codes.item_count) * codes.words_per_item();
    const std::size_t expected = 20 + word_count * 8 +
                                 static_cast<std::size_t>(codes.item_count) * 8;
    if (size != expected) {
        throw ParseError("codes file: truncated or oversized payload in " + path);
    }
    std::size_t offset = 20;
    codes.words.resize(word_count);
    for (std::size_t w = 0; w < word_count; ++w, offset += 8) {
        codes.words[w] = read_le(p + offset, 8);
    }
    codes.item_ids.resize(static_cast<std::size_t>(codes.item_count));
    for (std::size_t i = 0; i < codes.item_ids.size(); ++i, offset += 8) {
        codes.item_ids[i] = static_cast<std::int64_t>(read_le(p + offset, 8));
    }
    return codes;
}

}  // namespace ldahash
