// Timing comparison between the OpenMP kernels and their serial references.
// The parallel paths are required to be bit-identical to the serial ones;
// this tool shows what the parallelism buys on this machine.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ldahash/codes.hpp"
#include "ldahash/eval.hpp"
#include "ldahash/matrix.hpp"
#include "ldahash/rng.hpp"

using namespace ldahash;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

template <typename F>
double time_best_of(int repeats, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const double start = now_seconds();
        fn();
        best = std::min(best, now_seconds() - start);
    }
    return best;
}

void report(const char* name, double serial_s, double parallel_s) {
    std::printf("%-34s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", name,
                serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; both columns run the same serial code\n");
#endif
    Rng rng(7);

    {
        const Matrix a = random_matrix(rng, 384, 384);
        const Matrix b = random_matrix(rng, 384, 384);
        Matrix sink;
        const double serial_s = time_best_of(3, [&] { sink = serial::matmul(a, b); });
        const double parallel_s = time_best_of(3, [&] { sink = matmul(a, b); });
        report("matmul 384x384 * 384x384", serial_s, parallel_s);
    }
    {
        // Scatter-shaped product: wide data matrix against itself.
        const Matrix x = random_matrix(rng, 256, 4096);
        Matrix sink;
        const double serial_s = time_best_of(3, [&] { sink = serial::matmul_a_bt(x, x); });
        const double parallel_s = time_best_of(3, [&] { sink = matmul_a_bt(x, x); });
        report("matmul_a_bt 256x4096 (Gram)", serial_s, parallel_s);
    }
    {
        // Projection-shaped product: d x r against d x n.
        const Matrix w = random_matrix(rng, 512, 64);
        const Matrix x = random_matrix(rng, 512, 8192);
        Matrix sink;
        const double serial_s = time_best_of(3, [&] { sink = serial::matmul_at_b(w, x); });
        const double parallel_s = time_best_of(3, [&] { sink = matmul_at_b(w, x); });
        report("matmul_at_b 512x64^T * 512x8192", serial_s, parallel_s);
    }
    {
        // Retrieval evaluation: per-query ranking + metrics over a gallery.
        const std::size_t gallery_n = 20000, query_n = 256;
        const int bits = 64;
        const Matrix gallery_values = random_matrix(rng, bits, gallery_n);
        const Matrix query_values = random_matrix(rng, bits, query_n);
        std::vector<int> gallery_labels(gallery_n), query_labels(query_n);
        for (std::size_t i = 0; i < gallery_n; ++i) {
            gallery_labels[i] = static_cast<int>(rng.bounded(10));
        }
        for (std::size_t i = 0; i < query_n; ++i) {
            query_labels[i] = static_cast<int>(rng.bounded(10));
        }
        const HammingIndex index(sign_quantize(gallery_values));
        const BinaryCodes queries = sign_quantize(query_values);
#ifdef _OPENMP
        const int max_threads = omp_get_max_threads();
        omp_set_num_threads(1);
        const double serial_s = time_best_of(
            2, [&] { evaluate(index, queries, query_labels, gallery_labels, 2); });
        omp_set_num_threads(max_threads);
#else
        const double serial_s = time_best_of(
            2, [&] { evaluate(index, queries, query_labels, gallery_labels, 2); });
#endif
        const double parallel_s = time_best_of(
            2, [&] { evaluate(index, queries, query_labels, gallery_labels, 2); });
        report("evaluate 256 queries x 20k gallery", serial_s, parallel_s);
    }
    return 0;
}
