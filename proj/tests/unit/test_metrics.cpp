#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "thermkit/error.hpp"
#include "thermkit/metrics.hpp"

using namespace thermkit;
using namespace thermkit::metrics;
using namespace testing;

namespace {

std::vector<Field> one(std::vector<double> v) { return {Field{"s0", std::move(v)}}; }

}  // namespace

TEST_CASE("single-voxel fixture") {
    const auto r = evaluate(one({351.0}), one({350.0}));
    CHECK(r.rmse == doctest::Approx(1.0));
    CHECK(r.mean_abs == doctest::Approx(1.0));
    CHECK(r.max_abs == doctest::Approx(1.0));
    CHECK(r.mape == doctest::Approx(100.0 / 350.0).epsilon(1e-12));
    CHECK(r.mape == doctest::Approx(0.2857).epsilon(1e-4));
    CHECK(r.pape == doctest::Approx(0.2857).epsilon(1e-4));
    CHECK(r.samples == 1);
    CHECK(r.values == 1);
}

TEST_CASE("two-voxel fixture") {
    const auto r = evaluate(one({301.0, 398.0}), one({300.0, 400.0}));
    CHECK(r.rmse == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
    CHECK(r.rmse == doctest::Approx(1.5811).epsilon(1e-4));
    CHECK(r.mean_abs == doctest::Approx(1.5));
    CHECK(r.max_abs == doctest::Approx(2.0));
    CHECK(r.mape == doctest::Approx(0.4167).epsilon(1e-4));
    CHECK(r.pape == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pooled and per-sample statistics") {
    const std::vector<Field> truth{{"a", {300.0, 300.0}}, {"b", {400.0, 400.0}}};
    const std::vector<Field> pred{{"a", {303.0, 300.0}}, {"b", {400.0, 404.0}}};
    const auto r = evaluate(pred, truth);
    CHECK(r.rmse == doctest::Approx(std::sqrt((9.0 + 16.0) / 4)));
    CHECK(r.mean_abs == doctest::Approx(7.0 / 4));
    CHECK(r.max_abs == 4.0);
    CHECK(r.mape == doctest::Approx(100.0 * (0.01 + 0.01) / 4));
    CHECK(r.pape == doctest::Approx(100.0 * (0.01 + 0.01) / 2));
    REQUIRE(r.per_sample.size() == 2);
    CHECK(r.per_sample[0].id == "a");
    CHECK(r.per_sample[1].max_abs == 4.0);
}

TEST_CASE("property: identity, shift and permutation") {
    Gen g(21);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = g.integer(1, 40), m = g.integer(1, 4);
        std::vector<Field> truth;
        for (int s = 0; s < m; ++s) {
            Field f{"s" + std::to_string(s), {}};
            for (int i = 0; i < n; ++i) f.values.push_back(g.uniform(290, 420));
            truth.push_back(f);
        }
        const auto zero = evaluate(truth, truth);
        CHECK(zero.rmse == 0.0);
        CHECK(zero.mape == 0.0);
        CHECK(zero.pape == 0.0);
        CHECK(zero.max_abs == 0.0);

        const double c = g.uniform(-3, 3);
        auto shifted = truth;
        for (auto& f : shifted)
            for (double& v : f.values) v += c;
        const auto sh = evaluate(shifted, truth);
        CHECK(sh.rmse == doctest::Approx(std::abs(c)).epsilon(1e-9));
        CHECK(sh.mean_abs == doctest::Approx(std::abs(c)).epsilon(1e-9));
        CHECK(sh.max_abs == doctest::Approx(std::abs(c)).epsilon(1e-9));

        // Permuting voxels consistently in both leaves every metric unchanged.
        auto noisy = truth;
        for (auto& f : noisy)
            for (double& v : f.values) v += g.uniform(-2, 2);
        const auto base = evaluate(noisy, truth);
        auto pt = truth, pn = noisy;
        for (std::size_t s = 0; s < pt.size(); ++s) {
            std::vector<std::size_t> idx(pt[s].values.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::shuffle(idx.begin(), idx.end(), g.engine());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                pt[s].values[i] = truth[s].values[idx[i]];
                pn[s].values[i] = noisy[s].values[idx[i]];
            }
        }
        const auto perm = evaluate(pn, pt);
        CHECK(perm.rmse == doctest::Approx(base.rmse).epsilon(1e-12));
        CHECK(perm.mape == doctest::Approx(base.mape).epsilon(1e-12));
        CHECK(perm.pape == doctest::Approx(base.pape).epsilon(1e-12));
        CHECK(perm.max_abs == base.max_abs);
        CHECK(base.rmse >= base.mean_abs - 1e-12);
        CHECK(base.max_abs >= base.rmse - 1e-12);
    }
}

TEST_CASE("improvement ratios") {
    CHECK(improvement_ratio(0.028, 0.062).value == doctest::Approx(2.21).epsilon(0.005));
    CHECK_FALSE(improvement_ratio(0.028, 0.062).infinite);
    CHECK(improvement_ratio(0.062, 0.062).value == 1.0);
    const Ratio inf = improvement_ratio(0.0, 0.062);
    CHECK(inf.infinite);
    CHECK(std::isinf(inf.value));
    CHECK_THROWS_AS(improvement_ratio(0.1, 0.0), Error);
    CHECK_THROWS_AS(improvement_ratio(-0.1, 1.0), Error);

    MetricReport ours, base;
    ours.mean_abs = 0.5;
    ours.max_abs = 2.0;
    base.mean_abs = 1.0;
    base.max_abs = 3.0;
    const Improvement imp = improvement(ours, base);
    CHECK(imp.mean.value == 2.0);
    CHECK(imp.max.value == 1.5);
}

TEST_CASE("input errors") {
    CHECK_THROWS_AS(evaluate(one({1.0}), {}), Error);
    CHECK_THROWS_AS(evaluate(one({1.0, 2.0}), one({300.0})), Error);
    CHECK_THROWS_AS(evaluate(one({1.0}), one({0.0})), Error);
    CHECK_THROWS_AS(evaluate(one({1.0}), one({std::nan("")})), Error);
    const std::vector<Field> none;
    CHECK_THROWS_AS(evaluate(none, none), Error);
}

TEST_CASE("json round trip") {
    const auto r = evaluate(one({301.0, 398.0}), one({300.0, 400.0}));
    const auto j = to_json(r);
    for (const char* key : {"rmse", "mape", "pape", "mean_abs", "max_abs", "samples"}) CHECK(j.contains(key));
    const auto back = report_from_json(j);
    CHECK(back.rmse == r.rmse);
    CHECK(back.pape == r.pape);
    CHECK(back.samples == r.samples);
    CHECK_FALSE(to_json(r, false).contains("per_sample"));
}
