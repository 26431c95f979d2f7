#include "ldahash/eval.hpp"

#include <cstdio>
#include <fstream>

#include "ldahash/errors.hpp"

namespace ldahash {

double average_precision(const std::vector<std::int64_t>& ranking,
                         const std::vector<char>& relevant) {
    if (ranking.size() != relevant.size()) {
        throw DimensionError("average_precision: ranking/relevance length mismatch");
    }
    std::int64_t total_relevant = 0;
    for (char flag : relevant) total_relevant += flag ? 1 : 0;
    if (total_relevant == 0) {
        throw ValidationError("average_precision: no relevant items in gallery");
    }
    double sum = 0.0;
    std::int64_t seen = 0;
    for (std::size_t k = 0; k < ranking.size(); ++k) {
        if (relevant[static_cast<std::size_t>(ranking[k])]) {
            ++seen;
            sum += static_cast<double>(seen) / static_cast<double>(k + 1);
        }
    }
    return sum / static_cast<double>(total_relevant);
}

EvalReport evaluate(const HammingIndex& index, const BinaryCodes& queries,
                    const std::vector<int>& query_labels,
                    const std::vector<int>& gallery_labels, int radius) {
    const BinaryCodes& gallery = index.gallery();
    if (gallery.item_count == 0) throw ValidationError("evaluate: empty gallery");
    if (queries.code_bits != gallery.code_bits) {
        throw DimensionError("evaluate: query/gallery code widths disagree");
    }
    if (query_labels.size() != static_cast<std::size_t>(queries.item_count)) {
        throw DimensionError("evaluate: query label count mismatch");
    }
    if (gallery_labels.size() != static_cast<std::size_t>(gallery.item_count)) {
        throw DimensionError("evaluate: gallery label count mismatch");
    }
    if (radius < 0) throw ValidationError("evaluate: radius must be >= 0");

    EvalReport report;
    report.radius = radius;
    report.per_query.resize(static_cast<std::size_t>(queries.item_count));

    const std::int64_t query_count = queries.item_count;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t q = 0; q < query_count; ++q) {
        QueryRecord& record = report.per_query[static_cast<std::size_t>(q)];
        record.query_id = queries.item_ids[static_cast<std::size_t>(q)];
        const int label = query_labels[static_cast<std::size_t>(q)];

        std::vector<char> relevant(gallery_labels.size());
        std::int64_t relevant_total = 0;
        for (std::size_t pos = 0; pos < gallery_labels.size(); ++pos) {
            relevant[pos] = gallery_labels[pos] == label ? 1 : 0;
            relevant_total += relevant[pos];
        }
        record.relevant_count = relevant_total;
        if (relevant_total == 0) continue;  // excluded below

        std::vector<int> distances;
        const std::vector<std::int64_t> ranking = index.rank_positions(
            queries.item_words(q), &distances);
        record.ap = average_precision(ranking, relevant);

        std::int64_t retrieved = 0;
        std::int64_t retrieved_relevant = 0;
        for (std::size_t pos = 0; pos < distances.size(); ++pos) {
            if (distances[pos] <= radius) {
                ++retrieved;
                retrieved_relevant += relevant[pos];
            }
        }
        record.retrieved_count = retrieved;
        record.precision = retrieved > 0
                               ? static_cast<double>(retrieved_relevant) /
                                     static_cast<double>(retrieved)
                               : 0.0;
        record.recall = static_cast<double>(retrieved_relevant) /
                        static_cast<double>(relevant_total);
        const double pr = record.precision + record.recall;
        record.f_measure = pr > 0.0 ? 2.0 * record.precision * record.recall / pr : 0.0;
    }

    // Deterministic reduction in query order.
    for (const QueryRecord& record : report.per_query) {
        if (record.relevant_count == 0) {
            ++report.excluded_query_count;
            continue;
        }
        ++report.included_query_count;
        report.map += record.ap;
        report.mean_precision += record.precision;
        report.mean_recall += record.recall;
        report.mean_f_measure += record.f_measure;
    }
    if (report.included_query_count > 0) {
        const double n = static_cast<double>(report.included_query_count);
        report.map /= n;
        report.mean_precision /= n;
        report.mean_recall /= n;
        report.mean_f_measure /= n;
    }
    return report;
}

namespace {

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace

void write_eval_summary(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot open summary file for writing: " + path);
    out << "map " << format_double(report.map) << "\n";
    out << "mean_precision_at_radius " << format_double(report.mean_precision) << "\n";
    out << "mean_recall_at_radius " << format_double(report.mean_recall) << "\n";
    out << "mean_f_measure_at_radius " << format_double(report.mean_f_measure) << "\n";
    out << "radius " << report.radius << "\n";
    out << "included_query_count " << report.included_query_count << "\n";
    out << "excluded_query_count " << report.excluded_query_count << "\n";
}

void write_eval_per_query_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot open per-query CSV for writing: " + path);
    out << "query_id,ap,precision,recall,f,retrieved,relevant\n";
    for (const QueryRecord& record : report.per_query) {
        out << record.query_id << ',' << format_double(record.ap) << ','
            << format_double(record.precision) << ',' << format_double(record.recall) << ','
            << format_double(record.f_measure) << ',' << record.retrieved_count << ','
            << record.relevant_count << "\n";
    }
}

}  // namespace ldahash
