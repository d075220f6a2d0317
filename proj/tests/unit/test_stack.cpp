#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "thermkit/bench.hpp"
#include "thermkit/error.hpp"
#include "thermkit/stack_json.hpp"

using namespace thermkit;
using namespace testing;

namespace {

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

}  // namespace

TEST_CASE("material table") {
    CHECK(default_material("Cu").k == 400.0);
    CHECK(default_material("Si").cv() == doctest::Approx(1.63e6).epsilon(1e-12));
    CHECK(default_material("substrate").k == 0.8);
    CHECK_THROWS_AS(default_material("unobtainium"), LookupError);
    for (const auto& [name, m] : default_materials()) {
        CHECK(m.k > 0.0);
        CHECK(m.cv() > 0.0);
    }
}

TEST_CASE("built-in cases validate cleanly") {
    for (const std::string& name : case_names()) {
        CAPTURE(name);
        CHECK(validate_stack(make_case(name)).empty());
    }
    CHECK_THROWS_AS(make_case("ind7c"), LookupError);
}

TEST_CASE("ind8c geometry") {
    const PackageStack s = make_case("ind8c");
    REQUIRE(s.layers.size() == 6);
    CHECK(s.layers[0].name == "substrate");
    CHECK(s.layers[0].extent_x == mm(10.0));
    CHECK(s.layers[0].thickness == mm(1.0));
    const Layer& ub = s.layers[*s.find_layer("ubump")];
    CHECK(ub.thickness == mm(0.04));
    CHECK(ub.array->r_core == mm(0.02));
    const Layer& c4 = s.layers[*s.find_layer("c4")];
    CHECK(c4.thickness == mm(0.1));
    CHECK(c4.array->r_core == mm(0.05));
    const Layer& tsv = s.layers[*s.find_layer("bottom_core")];
    CHECK(tsv.array->r_core == mm(0.02));
    CHECK(tsv.array->t_shell == mm(0.01));
    CHECK(tsv.array->count_x == 10);
    CHECK(s.core_ids().size() == 8);
    CHECK(make_case("ind32c").core_ids().size() == 32);
    CHECK(s.bc_top.h == 1000.0);
    CHECK(s.bc_bottom.h == 100.0);
}

TEST_CASE("mm conversion round trips") {
    for (double v : {0.02, 0.04, 0.1, 0.2, 1.0, 10.0, 0.5}) CHECK(to_mm(mm(v)) == doctest::Approx(v).epsilon(1e-15));
}

TEST_CASE("validate_stack rules") {
    PackageStack s = make_case("ind8c");
    const std::size_t t = *s.find_layer("bottom_core");

    SUBCASE("overlapping cylinders") {
        s.layers[t].array->r_core = mm(0.05);
        s.layers[t].array->t_shell = mm(0.01);
        const auto v = validate_stack(s);
        CHECK(has_rule(v, "overlapping cylinders"));
        auto it = std::find_if(v.begin(), v.end(), [](const Violation& x) { return x.rule == "overlapping cylinders"; });
        CHECK(it->layer == "bottom_core");
    }
    SUBCASE("at the limit 0.02 + 0.01 < 0.05 is fine") {
        CHECK_FALSE(has_rule(validate_stack(s), "overlapping cylinders"));
    }
    SUBCASE("all adiabatic") {
        s.bc_top = s.bc_bottom = BoundaryCondition::adiabatic();
        CHECK(has_rule(validate_stack(s), "singular steady problem"));
    }
    SUBCASE("nonpositive thickness") {
        s.layers[1].thickness = 0.0;
        CHECK(has_rule(validate_stack(s), "nonpositive thickness"));
    }
    SUBCASE("array larger than the layer") {
        s.layers[t].array->count_x = 11;
        CHECK(has_rule(validate_stack(s), "array exceeds layer extent"));
    }
    SUBCASE("overlapping core regions") {
        auto& r = s.layers[t].power_regions;
        r[1].rect.x0 = r[0].rect.x0;
        CHECK(has_rule(validate_stack(s), "overlapping regions"));
    }
    SUBCASE("region outside the footprint") {
        s.layers[t].power_regions[0].rect.x1 = mm(2.0);
        CHECK(has_rule(validate_stack(s), "region outside footprint"));
    }
    SUBCASE("convective h must be positive") {
        s.bc_top.h = 0.0;
        CHECK(has_rule(validate_stack(s), "nonpositive h"));
    }
    SUBCASE("duplicate names") {
        s.layers[2].name = s.layers[3].name;
        CHECK(has_rule(validate_stack(s), "duplicate layer name"));
    }
    SUBCASE("idempotent") {
        s.layers[1].thickness = -1.0;
        const auto a = validate_stack(s);
        const auto b = validate_stack(s);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].rule == b[i].rule);
    }
}

TEST_CASE("stack_total_power") {
    const PackageStack s8 = make_case("ind8c");
    PowerAssignment p;
    for (const auto& id : s8.core_ids()) p.watts[id] = 0.02;
    CHECK(stack_total_power(s8, p) == doctest::Approx(0.16).epsilon(1e-14));
    for (auto& [id, w] : p.watts) w = 0.0;
    CHECK(stack_total_power(s8, p) == 0.0);

    const PackageStack s32 = make_case("ind32c");
    PowerAssignment q;
    int i = 1;
    for (const auto& id : s32.core_ids()) q.watts[id] = 0.001 * i++;
    CHECK(stack_total_power(s32, q) == doctest::Approx(0.001 * 32 * 33 / 2).epsilon(1e-12));

    p.watts["nowhere.c9"] = 0.1;
    CHECK_THROWS_WITH_AS(stack_total_power(s8, p), doctest::Contains("nowhere.c9"), LookupError);
    PowerAssignment missing;
    CHECK_THROWS_AS(stack_total_power(s8, missing), LookupError);
}

TEST_CASE("stack json round trip") {
    for (const std::string& name : case_names()) {
        CAPTURE(name);
        const PackageStack s = make_case(name);
        for (const char* units : {"mm", "m"}) {
            const PackageStack back = stack_from_json(stack_to_json(s, units));
            CHECK(stack_to_json(back, "m") == stack_to_json(s, "m"));
            CHECK(validate_stack(back).empty());
        }
    }
    nlohmann::json bad = stack_to_json(make_case("ind8c"));
    bad["units"] = "inch";
    CHECK_THROWS_AS(stack_from_json(bad), ParseError);
    bad = stack_to_json(make_case("ind8c"));
    bad["layers"][0]["material"] = "cheese";
    CHECK_THROWS_AS(stack_from_json(bad), ParseError);
    CHECK_THROWS_AS(resolve_stack("/no/such/stack.json"), LookupError);
}
