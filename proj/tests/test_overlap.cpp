#include "doctest.h"

#include "overlap_lab/error.hpp"
#include "overlap_lab/overlap.hpp"
#include "support.hpp"

using namespace overlap_lab;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an overlap_lab::Error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("argmax_labels: unique max, ties to lowest index, agrees with a row scan") {
    const auto m = testing::make_manifest({0, 0}, 3);
    const auto ps = testing::make_run(m, {0.1f, 2.0f, -1.0f, 3.0f, 3.0f, 0.0f}, "r");
    CHECK(argmax_labels(ps) == std::vector<ClassIndex>{1, 0});

    std::mt19937_64 rng(50);
    const auto big = testing::random_manifest(rng, 50, 10);
    const auto run = testing::make_run(big, testing::random_scores(rng, 50, 10), "r");
    const auto labels = argmax_labels(run);
    for (std::size_t i = 0; i < 50; ++i) CHECK(labels[i] == testing::oracle::top1(run, run.image_ids()[i]));
}

TEST_CASE("overlap_labels examples") {
    std::mt19937_64 rng(3);
    SUBCASE("all runs correct") {
        const auto m = testing::random_manifest(rng, 12, 4);
        std::vector<ClassIndex> truth;
        for (const auto& r : m.records()) truth.push_back(r.label_index);
        std::vector<PredictionSet> runs;
        for (int k = 0; k < 3; ++k) runs.push_back(testing::run_with_predictions(rng, m, truth, "r" + std::to_string(k)));
        const auto p = overlap_labels(m, runs, testing::all_ids(m));
        CHECK(p.group_sizes == std::vector<std::size_t>{0, 0, 0, 12});
        for (auto o : p.overlap) CHECK(o == 3);
    }
    SUBCASE("two runs, complementary") {
        const auto m = testing::make_manifest({0, 1}, 2);
        std::vector<PredictionSet> runs{testing::run_with_predictions(rng, m, {0, 0}, "A"),
                                        testing::run_with_predictions(rng, m, {1, 1}, "B")};
        const auto p = overlap_labels(m, runs, testing::all_ids(m));
        CHECK(p.overlap == std::vector<std::int32_t>{1, 1});
        CHECK(p.group_sizes == std::vector<std::size_t>{0, 2, 0});
        CHECK(export_subset(p, 1) == ImageIds{"img00000", "img00001"});
        CHECK(export_subset(p, 0).empty());
    }
}

TEST_CASE("overlap_labels reports missing coverage naming run and image") {
    const auto m = testing::make_manifest({0, 1, 1}, 2);
    const PredictionSet partial({"short", "S", 0, m.dataset_id()}, {"img00000"}, {1.0f, 0.0f}, 2);
    try {
        overlap_labels(m, std::vector<PredictionSet>{partial}, testing::all_ids(m));
        FAIL("expected MissingImageCoverage");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingImageCoverage);
        CHECK(std::string(e.what()).find("short") != std::string::npos);
        CHECK(std::string(e.what()).find("img00001") != std::string::npos);
    }
}

TEST_CASE("overlap properties on random fixtures") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        const auto m = testing::random_manifest(rng, 60, 5);
        const auto ids = testing::all_ids(m);
        std::vector<PredictionSet> runs;
        for (std::size_t k = 0; k < n; ++k) {
            runs.push_back(testing::run_with_predictions(rng, m, testing::noisy_predictions(rng, m, 0.6),
                                                         "r" + std::to_string(k)));
        }
        const auto p = overlap_labels(m, runs, ids);

        // partition
        std::size_t total = 0;
        for (auto g : p.group_sizes) total += g;
        CHECK(total == ids.size());

        // mean-accuracy identity
        Rational mean_acc;
        for (const auto& r : runs) mean_acc = mean_acc + accuracy(r, m, ids);
        mean_acc = mean_acc / Rational(static_cast<std::int64_t>(n), 1);
        std::int64_t sum_o = 0;
        for (auto o : p.overlap) sum_o += o;
        CHECK(mean_acc == Rational(sum_o, static_cast<std::int64_t>(n * ids.size())));

        // permutation invariance
        auto shuffled = runs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(overlap_labels(m, shuffled, ids).overlap == p.overlap);

        // monotonicity
        auto more = runs;
        more.push_back(testing::run_with_predictions(rng, m, testing::noisy_predictions(rng, m, 0.5), "extra"));
        const auto q = overlap_labels(m, more, ids);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            CHECK(q.overlap[i] >= p.overlap[i]);
            CHECK(q.overlap[i] <= p.overlap[i] + 1);
        }

        // easy-set bound
        std::size_t min_correct = ids.size();
        for (const auto& r : runs) min_correct = std::min(min_correct, correct_set(r, m, ids).size());
        CHECK(p.group_sizes[n] <= min_correct);
    }
}

TEST_CASE("correct_set") {
    std::mt19937_64 rng(5);
    const auto m = testing::random_manifest(rng, 100, 7);
    const auto ids = testing::all_ids(m);

    std::vector<ClassIndex> truth;
    for (const auto& r : m.records()) truth.push_back(r.label_index);
    CHECK(correct_set(testing::run_with_predictions(rng, m, truth, "perfect"), m, ids) == ids);

    const auto constant = testing::run_with_predictions(rng, m, std::vector<ClassIndex>(100, 3), "const");
    ImageIds expect;
    for (const auto& id : ids) {
        if (m.label_of(id) == 3) expect.push_back(id);
    }
    CHECK(correct_set(constant, m, ids) == expect);

    const auto random = testing::make_run(m, testing::random_scores(rng, 100, 7), "rand");
    const auto got = correct_set(random, m, ids);
    const auto want = testing::oracle::correct(m, random, ids);
    CHECK(std::set<std::string>(got.begin(), got.end()) == want);
}

TEST_CASE("subset_correctness examples") {
    ImageIds universe;
    for (int i = 0; i < 10; ++i) universe.push_back("i" + std::to_string(i));

    SUBCASE("one method") {
        const auto t = subset_correctness({{"m", {"i0", "i1", "i2"}}}, universe);
        CHECK(t.counts == std::vector<std::uint64_t>{7, 3});
    }
    SUBCASE("two methods with disjoint correct sets") {
        const auto t = subset_correctness({{"A", {"i0", "i1", "i2"}}, {"B", {"i3", "i4", "i5", "i6"}}}, universe);
        CHECK(t.count(0b00) == 3);
        CHECK(t.count(0b01) == 3);
        CHECK(t.count(0b10) == 4);
        CHECK(t.count(0b11) == 0);
    }
    SUBCASE("guards") {
        NamedImageSets seventeen;
        for (int j = 0; j < 17; ++j) seventeen.emplace_back("m" + std::to_string(j), ImageIds{});
        CHECK(code_of([&] { subset_correctness(seventeen, universe); }) == ErrorCode::TooManyMethods);
        CHECK(code_of([&] { subset_correctness({{"A", {"zz"}}}, universe); }) == ErrorCode::UnknownImageId);
    }
}

TEST_CASE("subset_correctness marginals and oracle agreement") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = testing::random_manifest(rng, 80, 6);
        const auto ids = testing::all_ids(m);
        const std::size_t k = 1 + rng() % 5;
        NamedImageSets sets;
        std::vector<std::pair<std::string, std::set<std::string>>> oracle_sets;
        for (std::size_t j = 0; j < k; ++j) {
            const auto run = testing::run_with_predictions(rng, m, testing::noisy_predictions(rng, m, 0.7), "r");
            const auto c = correct_set(run, m, ids);
            sets.emplace_back("M" + std::to_string(j), c);
            oracle_sets.emplace_back("M" + std::to_string(j), testing::oracle::correct(m, run, ids));
        }
        const auto t = subset_correctness(sets, ids);
        CHECK(t.total() == ids.size());
        for (std::size_t j = 0; j < k; ++j) {
            std::uint64_t marginal = 0;
            for (std::uint32_t mask = 0; mask < t.counts.size(); ++mask) {
                if (mask & (1u << j)) marginal += t.counts[mask];
            }
            CHECK(marginal == sets[j].second.size());
        }
        const auto want = testing::oracle::subset_counts(oracle_sets, ids);
        for (std::uint32_t mask = 0; mask < t.counts.size(); ++mask) {
            std::set<std::string> who;
            for (std::size_t j = 0; j < k; ++j) {
                if (mask & (1u << j)) who.insert(t.methods[j]);
            }
            const auto it = want.find(who);
            CHECK(t.counts[mask] == (it == want.end() ? 0 : it->second));
        }
    }
}

TEST_CASE("accuracy and per-class accuracy") {
    std::mt19937_64 rng(9);
    const auto m = testing::make_manifest({0, 0, 1, 1, 2, 2, 2, 2}, 4);
    const auto ids = testing::all_ids(m);
    CHECK(accuracy(testing::run_with_predictions(rng, m, {0, 0, 1, 1, 2, 2, 2, 2}, "p"), m, ids) == Rational(1, 1));
    CHECK(accuracy(testing::run_with_predictions(rng, m, {1, 1, 0, 0, 3, 3, 3, 3}, "w"), m, ids) == Rational(0, 1));
    const auto seven = testing::run_with_predictions(rng, m, {0, 0, 1, 1, 2, 2, 2, 3}, "s");
    CHECK(accuracy(seven, m, ids) == Rational(7, 8));
    CHECK(accuracy(seven, m, ids).percent(3) == "87.500");
    CHECK(code_of([&] { accuracy(seven, m, {}); }) == ErrorCode::EmptyImageSet);

    const auto half = testing::run_with_predictions(rng, m, {0, 1, 1, 1, 2, 2, 2, 2}, "h");
    const auto per_class = per_class_accuracy(half, m, ids);
    CHECK(per_class.size() == 3);  // class 3 has no images
    CHECK(per_class.at(0) == Rational(1, 2));
    CHECK(per_class.at(1) == Rational(1, 1));
    CHECK(per_class.at(2) == Rational(1, 1));
}

TEST_CASE("export_subset boundaries") {
    OverlapPartition p{3, {"a", "b", "c"}, {3, 3, 3}, {0, 0, 0, 3}};
    CHECK(export_subset(p, 0).empty());
    CHECK(export_subset(p, 3) == ImageIds{"a", "b", "c"});
    CHECK(code_of([&] { export_subset(p, 4); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { export_subset(p, -1); }) == ErrorCode::InvalidArgument);
}
