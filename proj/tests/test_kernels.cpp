#include "doctest.h"

#include <omp.h>

#include <cmath>
#include <numeric>

#include "overlap_lab/kernels.hpp"
#include "support.hpp"

using namespace overlap_lab;
using namespace overlap_lab::kernels;

namespace {

struct Fixture {
    std::size_t m, c, n;
    std::vector<std::vector<float>> scores;
    std::vector<std::vector<std::size_t>> rows;
    std::vector<RowSelection> members;
};

Fixture make_fixture(std::uint64_t seed, std::size_t m, std::size_t c, std::size_t n) {
    std::mt19937_64 rng(seed);
    Fixture f{m, c, n, {}, {}, {}};
    for (std::size_t k = 0; k < n; ++k) {
        f.scores.push_back(testing::random_scores(rng, m, c));
        std::vector<std::size_t> r(m);
        std::iota(r.begin(), r.end(), 0);
        std::shuffle(r.begin(), r.end(), rng);
        f.rows.push_back(std::move(r));
    }
    for (std::size_t k = 0; k < n; ++k) f.members.push_back({f.scores[k], c, f.rows[k]});
    return f;
}

}  // namespace

TEST_CASE("argmax takes the first maximal score") {
    const float a[] = {0.1f, 2.0f, -1.0f};
    const float b[] = {3.0f, 3.0f, 0.0f};
    CHECK(argmax(std::span<const float>(a)) == 1);
    CHECK(argmax(std::span<const float>(b)) == 0);
}

TEST_CASE("softmax row examples") {
    std::vector<double> out(2);
    const float even[] = {0.0f, 0.0f};
    softmax_row(even, out);
    CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-15));

    const float ln3[] = {0.0f, static_cast<float>(std::log(3.0))};
    softmax_row(ln3, out);
    // float(ln 3) is within 1 ulp of ln 3, so the result is within ~1e-7 of 1/4, 3/4
    CHECK(std::abs(out[0] - 0.25) < 1e-7);
    CHECK(std::abs(out[1] - 0.75) < 1e-7);

    const float big[] = {1000.0f, 1001.0f};
    const float small[] = {0.0f, 1.0f};
    std::vector<double> shifted(2), base(2);
    softmax_row(big, shifted);
    softmax_row(small, base);
    CHECK(std::isfinite(shifted[0]));
    CHECK(shifted == base);
}

TEST_CASE("sorted_sum is independent of input order") {
    std::vector<double> v{0.1, 1e-17, 0.7, 0.2, 3e-17};
    std::vector<double> w{3e-17, 0.2, 0.7, 1e-17, 0.1};
    CHECK(sorted_sum(v) == sorted_sum(w));
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
    for (int threads : {1, 2, 4, 7}) {
        omp_set_num_threads(threads);
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            const auto f = make_fixture(seed * 31 + static_cast<std::uint64_t>(threads), 157, 9, 1 + seed % 5);
            CAPTURE(threads);
            CAPTURE(seed);

            std::vector<ClassIndex> a(f.m), b(f.m);
            serial::argmax_rows(f.members[0], a);
            parallel::argmax_rows(f.members[0], b);
            CHECK(a == b);

            std::vector<double> sa(f.m * f.c), sb(f.m * f.c);
            serial::softmax_rows(f.scores[0], f.c, sa);
            parallel::softmax_rows(f.scores[0], f.c, sb);
            CHECK(sa == sb);

            serial::vote(f.members, a);
            parallel::vote(f.members, b);
            CHECK(a == b);

            serial::cp_avg(f.members, a);
            parallel::cp_avg(f.members, b);
            CHECK(a == b);

            std::vector<std::vector<ClassIndex>> preds(f.n, std::vector<ClassIndex>(f.m));
            for (std::size_t k = 0; k < f.n; ++k) serial::argmax_rows(f.members[k], preds[k]);
            std::vector<ClassIndex> truth(f.m);
            for (std::size_t i = 0; i < f.m; ++i) truth[i] = static_cast<ClassIndex>(i % f.c);
            std::vector<std::int32_t> oa(f.m), ob(f.m);
            serial::overlap_counts(preds, truth, oa);
            parallel::overlap_counts(preds, truth, ob);
            CHECK(oa == ob);

            std::vector<std::uint32_t> masks(f.m);
            for (std::size_t i = 0; i < f.m; ++i) masks[i] = static_cast<std::uint32_t>((i * 2654435761u) % 32);
            std::vector<std::uint64_t> ha(32), hb(32);
            serial::mask_histogram(masks, ha);
            parallel::mask_histogram(masks, hb);
            CHECK(ha == hb);
        }
    }
    omp_set_num_threads(omp_get_num_procs());
}
