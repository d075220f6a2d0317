#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "thermkit/assembly.hpp"
#include "thermkit/bench.hpp"
#include "thermkit/emt.hpp"
#include "thermkit/error.hpp"
#include "thermkit/grid.hpp"

using namespace thermkit;
using namespace testing;

namespace {

// Cheap HF mesh of ind8c: the TSVs still get two cells across r_core.
HfResolution coarse_hf() {
    HfResolution r;
    r.cells_per_mm = 100.0;
    r.z_cells_per_layer = 1;
    r.z_cells_per_mm = 0.0;
    r.max_cells_per_axis = 100;
    r.subsamples = 2;
    return r;
}

double integral(const VoxelGrid& g, const std::vector<double>& f) {
    const auto v = g.cell_volumes();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * v[i];
    return s;
}

}  // namespace

TEST_CASE("hand-assembled two-cell column") {
    // 1 mm x 1 mm x 0.2 mm, two cells in z, Dirichlet bottom, film top.
    const double k = 20.0, w = 1e-3, t = 2e-4, h = 500.0;
    PackageStack s = slab(k, t, w, BoundaryCondition::dirichlet(300.0), BoundaryCondition::convective(h, 290.0));
    LfResolution r;
    r.cells_per_mm = 1.0;
    r.z_cells_per_layer = 2;
    const VoxelGrid g = build_lf_mesh(s, r);
    REQUIRE(g.size() == 2);
    const SparseSystem sys = assemble(g, s);
    const double area = w * w, dz = t / 2;
    const double g_mid = k * area / dz;
    const double g_bot = area / (0.5 * dz / k);
    const double g_top = area / (1.0 / h + 0.5 * dz / k);
    CHECK(sys.a.at(0, 1) == doctest::Approx(-g_mid).epsilon(1e-14));
    CHECK(sys.a.at(1, 0) == sys.a.at(0, 1));
    CHECK(sys.a.at(0, 0) == doctest::Approx(g_mid + g_bot).epsilon(1e-14));
    CHECK(sys.a.at(1, 1) == doctest::Approx(g_mid + g_top).epsilon(1e-14));
    CHECK(sys.b_bc[0] == doctest::Approx(g_bot * 300.0).epsilon(1e-14));
    CHECK(sys.b_bc[1] == doctest::Approx(g_top * 290.0).epsilon(1e-14));
    CHECK(sys.capacitance[0] == doctest::Approx(1.6e6 * area * dz).epsilon(1e-14));
    REQUIRE(sys.boundary.size() == 2);
}

TEST_CASE("harmonic face between dissimilar cells") {
    PackageStack s = slab(400.0, 1e-4, 1e-3, BoundaryCondition::dirichlet(300.0), BoundaryCondition::adiabatic());
    Layer top = s.layers[0];
    top.name = "ox";
    top.bulk = mat("ox", 1.4);
    top.power_regions.clear();
    s.layers.push_back(top);
    LfResolution r;
    r.cells_per_mm = 1.0;
    r.z_cells_per_layer = 1;
    const VoxelGrid g = build_lf_mesh(s, r);
    const SparseSystem sys = assemble(g, s);
    const double k_face = 2.0 / (1.0 / 400.0 + 1.0 / 1.4);
    CHECK(k_face == doctest::Approx(2.790).epsilon(1e-3));
    CHECK(-sys.a.at(0, 1) == doctest::Approx(k_face * 1e-6 / 1e-4).epsilon(1e-13));
}

TEST_CASE("stacks without arrays mesh identically at both fidelities") {
    const PackageStack s = make_case("hs-like-4c");
    HfResolution hr;
    hr.cells_per_mm = 5.0;
    hr.z_cells_per_layer = 2;
    hr.z_cells_per_mm = 0.0;
    LfResolution lr;
    lr.cells_per_mm = 5.0;
    lr.z_cells_per_layer = 2;
    const VoxelGrid a = build_hf_mesh(s, hr), b = build_lf_mesh(s, lr);
    CHECK(a.kx == b.kx);
    CHECK(a.kz == b.kz);
    CHECK(a.cv == b.cv);
}

TEST_CASE("source density of a single core") {
    // 0.08 W over 1 mm x 1 mm x 0.1 mm.
    PackageStack s = slab(100.0, 1e-4, 1e-3, BoundaryCondition::dirichlet(300.0), BoundaryCondition::adiabatic());
    LfResolution r;
    r.cells_per_mm = 4.0;
    r.z_cells_per_layer = 2;
    VoxelGrid g = build_lf_mesh(s, r);
    rasterize_power(g, s, PowerAssignment{{{"heat", 0.08}}, 0});
    for (double q : g.q) CHECK(q == doctest::Approx(8e8).epsilon(1e-12));
}

TEST_CASE("power conservation on random assignments") {
    const PackageStack s = make_case("ind8c");
    VoxelGrid lf = build_lf_mesh(s);
    VoxelGrid hf = build_hf_mesh(s, coarse_hf());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const PowerAssignment p = sample_power(s, seed);
        const double total = stack_total_power(s, p);
        rasterize_power(lf, s, p);
        rasterize_power(hf, s, p);
        CHECK(integral(lf, lf.q) == doctest::Approx(total).epsilon(1e-12));
        CHECK(integral(hf, hf.q) == doctest::Approx(total).epsilon(1e-12));
    }
    // Cores whose edges fall between cell faces still conserve power.
    LfResolution odd;
    odd.cells_per_mm = 7.0;
    odd.max_cells_per_axis = 13;
    VoxelGrid g = build_lf_mesh(make_case("ind32c"), odd);
    const PowerAssignment p = sample_power(make_case("ind32c"), 3);
    rasterize_power(g, make_case("ind32c"), p);
    CHECK(integral(g, g.q) == doctest::Approx(stack_total_power(make_case("ind32c"), p)).epsilon(1e-12));
}

TEST_CASE("assembled matrix structure") {
    const PackageStack s = make_case("ind8c");
    for (const VoxelGrid& g : {build_lf_mesh(s), build_hf_mesh(s, coarse_hf())}) {
        const SparseSystem sys = assemble(g, s);
        const CsrMatrix& a = sys.a;
        std::vector<double> bsum(sys.size(), 0.0);
        for (const auto& b : sys.boundary) bsum[b.cell] += b.conductance;
        bool symmetric = true, rows_ok = true, signs_ok = true;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            double row = 0.0;
            for (auto p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
                const std::size_t j = static_cast<std::size_t>(a.col[p]);
                row += a.val[p];
                if (j != i) {
                    if (!(a.val[p] < 0.0)) signs_ok = false;
                    if (a.at(j, i) != a.val[p]) symmetric = false;
                } else if (!(a.val[p] > 0.0)) {
                    signs_ok = false;
                }
            }
            // Conduction rows cancel; only boundary links remain.
            if (std::abs(row - bsum[i]) > 1e-9 * a.at(i, i)) rows_ok = false;
        }
        CHECK(symmetric);
        CHECK(rows_ok);
        CHECK(signs_ok);
        CHECK(g.total_volume() == doctest::Approx(s.volume()).epsilon(1e-12));
    }
}

TEST_CASE("HF cells average the resolved materials") {
    const PackageStack s = make_case("ind8c");
    const VoxelGrid g = build_hf_mesh(s, coarse_hf());
    const std::size_t l = *s.find_layer("bottom_core");
    const Slab& slab_l = g.slabs[l];
    double cv_sum = 0.0;
    for (std::size_t c = slab_l.offset; c < slab_l.offset + slab_l.cells(); ++c) cv_sum += g.cv[c];
    // Mean heat capacity approaches the volume average as cells shrink.
    const double mean = cv_sum / slab_l.cells();
    CHECK(mean == doctest::Approx(emt::homogenize_layer(s.layers[l]).c_v).epsilon(0.02));
}

TEST_CASE("overlaps_1d") {
    const auto o = overlaps_1d(0.0, 1.0 / 3, 3, 0.0, 0.5, 2);
    REQUIRE(o.size() == 4);
    CHECK(o[0].src == 0);
    CHECK(o[0].dst == 0);
    CHECK(o[0].length == doctest::Approx(1.0 / 3));
    CHECK(o[1].length == doctest::Approx(1.0 / 6));
    CHECK(o[2].length == doctest::Approx(1.0 / 6));
    CHECK(o[3].length == doctest::Approx(1.0 / 3));
    CHECK(overlaps_1d(0.0, 1.0, 1, 2.0, 1.0, 1).empty());

    Gen gen(8);
    for (int i = 0; i < 200; ++i) {
        const int na = gen.integer(1, 30), nb = gen.integer(1, 30);
        const double a0 = gen.uniform(-1, 1), da = gen.uniform(0.01, 0.2);
        const double b0 = gen.uniform(-1, 1), db = gen.uniform(0.01, 0.2);
        const auto v = overlaps_1d(a0, da, na, b0, db, nb);
        double total = 0.0;
        for (const auto& x : v) {
            CHECK(x.length > 0.0);
            total += x.length;
        }
        const double expect = std::max(0.0, std::min(a0 + na * da, b0 + nb * db) - std::max(a0, b0));
        CHECK(total == doctest::Approx(expect).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("resampling conserves the volume integral") {
    const PackageStack s = make_case("ind8c");
    const VoxelGrid hf = build_hf_mesh(s, coarse_hf());
    const VoxelGrid lf = build_lf_mesh(s);
    Gen gen(3);
    std::vector<double> f(hf.size());
    for (double& v : f) v = gen.uniform(290, 400);
    const auto r = resample_to(hf, f, lf);
    CHECK(integral(lf, r) == doctest::Approx(integral(hf, f)).epsilon(1e-12));
    std::vector<double> c(hf.size(), 310.0);
    for (double v : resample_to(hf, c, lf)) CHECK(v == doctest::Approx(310.0).epsilon(1e-12));
    for (double v : top_plane(hf, c, 5, 7, 9)) CHECK(v == doctest::Approx(310.0).epsilon(1e-12));
    CHECK_THROWS_AS(resample_to(hf, std::vector<double>(3), lf), GeometryError);
}

TEST_CASE("under-resolved arrays are refused") {
    HfResolution r = coarse_hf();
    r.cells_per_mm = 60.0;
    r.max_cells_per_axis = 60;
    CHECK_THROWS_AS(build_hf_mesh(make_case("ind8c"), r), GeometryError);
    PackageStack bad = make_case("ind8c");
    bad.layers[1].thickness = -1.0;
    CHECK_THROWS_AS(build_lf_mesh(bad), GeometryError);
    CHECK_THROWS_AS(assemble(build_lf_mesh(make_case("ind8c")), BoundaryCondition::adiabatic(),
                             BoundaryCondition::adiabatic()),
                    SingularSystemError);
}

TEST_CASE("waveform rasterization keeps every segment") {
    const PackageStack s = make_case("ind8c");
    const VoxelGrid g = build_lf_mesh(s);
    const PowerWaveform w = sample_waveform(s, 4, 3, 1.5);
    const SourceSchedule sched = rasterize_waveform(g, s, w);
    REQUIRE(sched.q.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(integral(g, sched.q[i]) == doctest::Approx(stack_total_power(s, w.segments[i].power)).epsilon(1e-12));
    }
    CHECK(sched.segment_at(0.75) == 1);
}
