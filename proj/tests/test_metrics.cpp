#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "amlab/metrics.hpp"
#include "amlab/rng.hpp"

using namespace amlab;

namespace {

// one-feature dataset holding the values 0..n-1
Dataset index_set(std::size_t n) {
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) d.add({double(i)}, 1);
    return d;
}

Classifier table(std::vector<int> labels) {
    return [labels = std::move(labels)](const Features& f) {
        return labels[std::size_t(f[0])];
    };
}

}  // namespace

TEST_CASE("identical classifiers have zero divergence") {
    Classifier c = table({1, 2, 1, 2});
    DivergenceReport r = divergence(c, c, index_set(4));
    CHECK(r.n1 == 2);
    CHECK(r.n2 == 2);
    CHECK(r.m1 == 0);
    CHECK(r.m2 == 0);
    CHECK(r.d1() == 0.0);
    CHECK(r.d2() == 0.0);
    CHECK(r.d() == 0.0);
    CHECK(r.d_max() == 0.0);
}

TEST_CASE("hand-tallied disagreement") {
    // reference: 1 1 2 2, candidate: 1 2 2 1
    DivergenceReport r = divergence(table({1, 1, 2, 2}), table({1, 2, 2, 1}), index_set(4));
    CHECK(r.n1 == 2);
    CHECK(r.n2 == 2);
    CHECK(r.m1 == 1);
    CHECK(r.m2 == 1);
    CHECK(r.d1() == 0.5);
    CHECK(r.d2() == 0.5);
    CHECK(r.d() == 0.5);
}

TEST_CASE("asymmetric bucket sizes weight d toward the bigger bucket") {
    // reference: 1 1 1 2, candidate flips only the label-2 sample
    DivergenceReport r = divergence(table({1, 1, 1, 2}), table({1, 1, 1, 1}), index_set(4));
    CHECK(r.d1() == 0.0);
    CHECK(r.d2() == 1.0);
    CHECK(r.d() == 0.25);
    CHECK(r.d_max() == 1.0);

    // swapping the roles changes the buckets, so divergence is asymmetric:
    // the new reference never says 2 and the tally is refused outright
    CHECK_THROWS_AS(divergence(table({1, 1, 1, 1}), table({1, 1, 1, 2}), index_set(4)),
                    ValidationError);
}

TEST_CASE("an empty reference bucket is refused") {
    DivergenceReport r;
    r.n1 = 3;
    r.m1 = 1;
    CHECK_THROWS_AS(r.d2(), ValidationError);
    CHECK_THROWS_AS(r.d_max(), ValidationError);
    CHECK(r.d1() == doctest::Approx(1.0 / 3.0));
    CHECK(r.d() == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS_AS(divergence(table({1}), table({1}), Dataset{}), ValidationError);
}

TEST_CASE("d is always between d1 and d2") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 2 + rng.index(10);
        std::vector<int> ref(n), cand(n);
        bool has1 = false, has2 = false;
        for (std::size_t i = 0; i < n; ++i) {
            ref[i] = 1 + int(rng.index(2));
            cand[i] = 1 + int(rng.index(2));
            (ref[i] == 1 ? has1 : has2) = true;
        }
        if (!has1 || !has2) continue;
        DivergenceReport r = divergence(table(ref), table(cand), index_set(n));
        double lo = std::min(r.d1(), r.d2());
        double hi = std::max(r.d1(), r.d2());
        CHECK(r.d() >= lo - 1e-15);
        CHECK(r.d() <= hi + 1e-15);
        CHECK(r.d_max() == hi);

        // recount by brute force
        std::size_t n1 = 0, n2 = 0, m1 = 0, m2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (ref[i] == 1) {
                ++n1;
                if (cand[i] != 1) ++m1;
            } else {
                ++n2;
                if (cand[i] != 2) ++m2;
            }
        }
        CHECK(r.n1 == n1);
        CHECK(r.n2 == n2);
        CHECK(r.m1 == m1);
        CHECK(r.m2 == m2);
    }
}

TEST_CASE("precomputed reference labels give the same report") {
    std::vector<int> ref = {1, 2, 1, 2, 1};
    Classifier cand = table({2, 2, 1, 1, 1});
    Dataset set = index_set(5);
    DivergenceReport a = divergence(table(ref), cand, set);
    DivergenceReport b = divergence_with_reference_labels(ref, cand, set);
    CHECK(a.n1 == b.n1);
    CHECK(a.n2 == b.n2);
    CHECK(a.m1 == b.m1);
    CHECK(a.m2 == b.m2);

    CHECK_THROWS_AS(divergence_with_reference_labels({1, 2}, cand, set), ValidationError);
    CHECK_THROWS_AS(divergence_with_reference_labels({1, 2, 3, 1, 1}, cand, set),
                    ValidationError);
}

TEST_CASE("error_rate compares against stored labels") {
    Dataset d;
    d.add({0.0}, 1);
    d.add({1.0}, 2);
    d.add({2.0}, 2);
    CHECK(error_rate(table({1, 2, 2}), d) == 0.0);
    CHECK(error_rate(table({2, 2, 2}), d) == doctest::Approx(1.0 / 3.0));
    CHECK(error_rate(table({2, 1, 1}), d) == 1.0);
    CHECK_THROWS_AS(error_rate(table({1}), Dataset{}), ValidationError);
}

TEST_CASE("percent formatting rounds half away from zero to two decimals") {
    CHECK(format_percent(0.0) == "0.00%");
    CHECK(format_percent(1.0) == "100.00%");
    CHECK(format_percent(0.455964) == "45.60%");
    CHECK(format_percent(0.45) == "45.00%");
    CHECK(format_percent(0.123456) == "12.35%");
    CHECK(format_percent(0.0000499) == "0.00%");
    CHECK(format_percent(0.00005) == "0.01%");
}

TEST_CASE("sweep rows match the report layout") {
    DivergenceReport a;
    a.n1 = 74;
    a.n2 = 149;
    a.m1 = 33;
    a.m2 = 68;
    // d1 = 33/74 = 44.59%, d2 = 68/149 = 45.64%, d = 101/223 = 45.29%
    CHECK(render_sweep_row(100, 0, a) == "100 | 100 | 0 | 44.59% | 45.64% | 45.29%");

    DivergenceReport b;
    b.n1 = 100;
    b.n2 = 100;
    b.m1 = 27;
    b.m2 = 28;
    CHECK(render_sweep_row(100, 100, b) == "200 | 100 | 100 | 27.00% | 28.00% | 27.50%");

    DivergenceReport zero;
    zero.n1 = 1;
    zero.n2 = 1;
    CHECK(render_sweep_row(1, 1, zero) == "2 | 1 | 1 | 0.00% | 0.00% | 0.00%");
}

TEST_CASE("report kv text round-trips the counts") {
    DivergenceReport r;
    r.n1 = 74;
    r.n2 = 149;
    r.m1 = 33;
    r.m2 = 68;
    std::string text = report_to_kv(r);
    CHECK(text.find("n1 74") != std::string::npos);
    CHECK(text.find("d1 ") != std::string::npos);
    DivergenceReport back = report_from_kv(text);
    CHECK(back.n1 == r.n1);
    CHECK(back.n2 == r.n2);
    CHECK(back.m1 == r.m1);
    CHECK(back.m2 == r.m2);
    CHECK(back.d1() == r.d1());

    CHECK_THROWS_AS(report_from_kv("n1 3\nn2 4\nm1 1"), IoError);  // m2 missing
}
