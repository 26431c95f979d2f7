#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldahash/codes.hpp"

namespace ldahash {

struct QueryRecord {
    std::int64_t query_id = 0;
    double ap = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    std::int64_t retrieved_count = 0;
    std::int64_t relevant_count = 0;
};

/// Retrieval metrics: mean average precision over full rankings plus
/// precision/recall/F inside a fixed-radius Hamming ball. Queries with no
/// relevant gallery item are excluded from every mean and counted.
struct EvalReport {
    double map = 0.0;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f_measure = 0.0;
    int radius = 0;
    std::vector<QueryRecord> per_query;  // one per query, in query order
    std::int64_t included_query_count = 0;
    std::int64_t excluded_query_count = 0;
};

/// AP over a full ranking: mean over relevant ranks k of (relevant seen at
/// or before k) / k. `ranking` is a permutation of gallery positions;
/// `relevant` is indexed by position and must contain at least one true.
double average_precision(const std::vector<std::int64_t>& ranking,
                         const std::vector<char>& relevant);

/// Runs the full protocol: per query, AP over the complete Hamming ranking
/// and precision/recall/F over the radius ball. Labels align with code
/// positions (not item ids). Relevance means equal class label.
EvalReport evaluate(const HammingIndex& index, const BinaryCodes& queries,
                    const std::vector<int>& query_labels,
                    const std::vector<int>& gallery_labels, int radius = 2);

/// Flat key-value summary ("map 0.93\n...") and the per-query CSV
/// (query_id, ap, precision, recall, f, retrieved, relevant).
void write_eval_summary(const EvalReport& report, const std::string& path);
void write_eval_per_query_csv(const EvalReport& report, const std::string& path);

}  // namespace ldahash
