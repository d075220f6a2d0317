#include "thermkit/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "thermkit/error.hpp"

namespace thermkit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void residual(const simd::KernelTable& kt, const CsrMatrix& a, std::span<const double> shift,
              std::span<const double> rhs, std::span<const double> x, std::span<double> r) {
    kt.spmv(a.view(), shift, x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
}

}  // namespace

std::size_t default_max_iter(std::size_t n) {
    const auto by_sqrt = static_cast<std::size_t>(std::ceil(10.0 * std::sqrt(static_cast<double>(n))));
    return std::max<std::size_t>(1, std::min(n, by_sqrt));
}

PcgResult pcg(const CsrMatrix& a, std::span<const double> shift, std::span<const double> rhs,
              std::span<const double> x0, double tol, std::size_t max_iter) {
    const simd::KernelTable& kt = simd::active_kernels();
    const std::size_t n = a.rows();
    if (rhs.size() != n || (!shift.empty() && shift.size() != n) || (!x0.empty() && x0.size() != n)) {
        throw SolverError("pcg: vector sizes do not match the matrix");
    }
    PcgResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());

    const double norm_b = std::sqrt(kt.dot(rhs, rhs));
    if (norm_b == 0.0) {
        std::fill(res.x.begin(), res.x.end(), 0.0);
        res.converged = true;
        return res;
    }

    std::vector<double> inv_diag = a.diagonal();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = inv_diag[i] + (shift.empty() ? 0.0 : shift[i]);
        if (!(d > 0.0)) throw SolverError("pcg: nonpositive diagonal entry, matrix is not SPD");
        inv_diag[i] = 1.0 / d;
    }

    std::vector<double> r(n), z(n), p(n), ap(n);
    residual(kt, a, shift, rhs, res.x, r);
    simd::DotPair d = kt.precondition(inv_diag, r, z);
    res.relative_residual = std::sqrt(d.rr) / norm_b;
    if (res.relative_residual <= tol) {
        res.converged = true;
        return res;
    }
    p = z;
    double rz = d.rz;

    while (res.iterations < max_iter) {
        kt.spmv(a.view(), shift, p, ap);
        const double pap = kt.dot(p, ap);
        if (!(pap > 0.0)) {
            std::ostringstream s;
            s << "pcg breakdown at iteration " << res.iterations << ": p^T A p = " << pap
              << " (matrix not SPD)";
            throw SolverError(s.str());
        }
        const double alpha = rz / pap;
        kt.update(alpha, p, ap, res.x, r);
        d = kt.precondition(inv_diag, r, z);
        ++res.iterations;
        res.relative_residual = std::sqrt(d.rr) / norm_b;
        res.history.push_back(res.relative_residual);

        if (res.relative_residual <= tol) {
            // The recurrence drifts from the true residual; confirm and restart if needed.
            residual(kt, a, shift, rhs, res.x, r);
            d = kt.precondition(inv_diag, r, z);
            res.relative_residual = std::sqrt(d.rr) / norm_b;
            if (res.relative_residual <= tol) {
                res.converged = true;
                break;
            }
            p = z;
            rz = d.rz;
            continue;
        }
        const double beta = d.rz / rz;
        rz = d.rz;
        kt.xpby(z, beta, p);
    }
    return res;
}

double energy_balance(const SparseSystem& sys, std::span<const double> q, std::span<const double> t) {
    double net = 0.0;
    for (std::size_t c = 0; c < q.size(); ++c) net += q[c] * sys.volume[c];
    for (const BoundaryLink& b : sys.boundary) net += b.conductance * (b.t_ref - t[b.cell]);
    return net;
}

namespace {

// Temperatures are solved as offsets from the conductance-weighted mean
// boundary temperature so the right-hand side carries only the sources.
double reference_temperature(const SparseSystem& sys) {
    double g = 0.0, gt = 0.0;
    for (const BoundaryLink& b : sys.boundary) {
        g += b.conductance;
        gt += b.conductance * b.t_ref;
    }
    return g > 0.0 ? gt / g : 0.0;
}

void offset_rhs(const SparseSystem& sys, double t_ref, std::span<double> rhs) {
    for (const BoundaryLink& b : sys.boundary) rhs[b.cell] += b.conductance * (b.t_ref - t_ref);
}

double total_power(const SparseSystem& sys, std::span<const double> q) {
    double p = 0.0;
    for (std::size_t c = 0; c < q.size(); ++c) p += q[c] * sys.volume[c];
    return p;
}

constexpr double kSteadyBalance = 1e-6;
constexpr double kTransientBalance = 1e-5;
constexpr double kBalanceFloor = 1e-12;
constexpr double kTightestTol = 1e-14;

}  // namespace

std::pair<TemperatureField, SolveReport> solve_steady(const SparseSystem& sys, std::span<const double> q,
                                                      const SteadyOptions& opts) {
    const auto t0 = Clock::now();
    const std::size_t n = sys.size();
    if (q.size() != n) throw SolverError("source vector size does not match the system");
    const std::size_t max_iter = opts.max_iter ? opts.max_iter : default_max_iter(n);
    const double t_ref = reference_temperature(sys);

    std::vector<double> rhs(n);
    for (std::size_t c = 0; c < n; ++c) rhs[c] = q[c] * sys.volume[c];
    offset_rhs(sys, t_ref, rhs);
    const double power = total_power(sys, q);
    const double allowed = std::max(kSteadyBalance * std::abs(power), kBalanceFloor);

    SolveReport report;
    std::vector<double> theta;
    std::vector<double> history;
    std::vector<double> temps(n);
    double tol = opts.tol;
    for (;;) {
        PcgResult r = pcg(sys.a, {}, rhs, theta, tol, max_iter - std::min(max_iter, report.iterations));
        report.iterations += r.iterations;
        history.insert(history.end(), r.history.begin(), r.history.end());
        theta = std::move(r.x);
        if (!r.converged) {
            std::ostringstream s;
            s << "steady solve did not reach relative residual " << tol << " within " << max_iter
              << " iterations (last " << r.relative_residual << ")";
            throw ConvergenceError(s.str(), std::move(history));
        }
        report.relative_residual = r.relative_residual;
        for (std::size_t c = 0; c < n; ++c) temps[c] = theta[c] + t_ref;
        report.energy_defect_w = std::abs(energy_balance(sys, q, temps));
        if (report.energy_defect_w <= allowed || tol <= kTightestTol) break;
        tol = std::max(tol * 0.1, kTightestTol);
    }
    report.wall_time_s = seconds_since(t0);

    TemperatureField field;
    field.values = std::move(temps);
    return {std::move(field), report};
}

double default_time_step(const VoxelGrid& grid) {
    double tau_min = std::numeric_limits<double>::infinity();
    for (const Slab& s : grid.slabs) {
        double cv = 0.0, kz = 0.0;
        for (std::size_t c = s.offset; c < s.offset + s.cells(); ++c) {
            cv += grid.cv[c];
            kz += grid.kz[c];
        }
        const double thickness = s.dz * s.nz;
        tau_min = std::min(tau_min, cv * thickness * thickness / kz);
    }
    return tau_min / 10.0;
}

std::pair<TransientResult, SolveReport> solve_transient(const SparseSystem& sys, const SourceSchedule& sources,
                                                        const TransientOptions& opts, const StepObserver& observer) {
    const auto t0 = Clock::now();
    const std::size_t n = sys.size();
    if (!(opts.dt > 0.0)) throw SolverError("transient solve needs dt > 0");
    if (!(opts.t_end > 0.0)) throw SolverError("transient solve needs t_end > 0");
    if (sources.q.empty()) throw SolverError("empty source schedule");
    for (const auto& q : sources.q) {
        if (q.size() != n) throw SolverError("source vector size does not match the system");
    }
    if (!opts.t0.empty() && opts.t0.size() != n) throw SolverError("initial field size does not match the system");

    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(opts.t_end / opts.dt - 1e-9)));
    const double dt = opts.t_end / static_cast<double>(steps);
    const std::size_t max_iter = opts.max_iter ? opts.max_iter : default_max_iter(n);

    // Frame step indices.
    std::vector<std::size_t> frame_steps;
    if (opts.frames <= 0) {
        for (std::size_t s = 0; s <= steps; ++s) frame_steps.push_back(s);
    } else {
        if (opts.frames < 2) throw SolverError("need at least two frames (t = 0 and t_end)");
        for (int f = 0; f < opts.frames; ++f) {
            frame_steps.push_back(static_cast<std::size_t>(
                std::llround(static_cast<double>(steps) * f / (opts.frames - 1))));
        }
        for (std::size_t f = 1; f < frame_steps.size(); ++f) {
            if (frame_steps[f] <= frame_steps[f - 1]) {
                throw SolverError("more frames requested than time steps; reduce --frames or dt");
            }
        }
    }

    const double t_ref = reference_temperature(sys);
    std::vector<double> shift(n);
    for (std::size_t c = 0; c < n; ++c) shift[c] = sys.capacitance[c] / dt;
    std::vector<double> bc_part(n, 0.0);
    offset_rhs(sys, t_ref, bc_part);

    std::vector<double> theta(n);
    for (std::size_t c = 0; c < n; ++c) theta[c] = (opts.t0.empty() ? opts.t_initial : opts.t0[c]) - t_ref;

    TransientResult result;
    std::size_t next_frame = 0;
    std::vector<double> temps(n);
    auto record = [&](std::size_t step) {
        for (std::size_t c = 0; c < n; ++c) temps[c] = theta[c] + t_ref;
        if (next_frame < frame_steps.size() && frame_steps[next_frame] == step) {
            TemperatureField f;
            f.values = temps;
            result.frames.push_back(std::move(f));
            result.times.push_back(dt * static_cast<double>(step));
            ++next_frame;
        }
    };
    record(0);

    SolveReport report;
    std::vector<double> rhs(n);
    std::vector<double> prev(n), older(n), guess(n);
    std::size_t last_segment = 0;
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t_mid = dt * (static_cast<double>(step) - 0.5);
        const std::size_t segment = sources.segment_at(t_mid);
        const std::vector<double>& q = sources.q[segment];
        double power = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double src = q[c] * sys.volume[c];
            power += src;
            rhs[c] = shift[c] * theta[c] + src + bc_part[c];
        }
        std::swap(older, prev);
        prev = theta;
        // Linear extrapolation as the starting guess while the source is unchanged.
        if (step >= 2 && segment == last_segment) {
            for (std::size_t c = 0; c < n; ++c) guess[c] = 2.0 * prev[c] - older[c];
        } else {
            guess = prev;
        }
        last_segment = segment;

        double tol = opts.tol;
        for (;;) {
            PcgResult r = pcg(sys.a, shift, rhs, guess, tol, max_iter);
            report.iterations += r.iterations;
            if (!r.converged) {
                std::ostringstream s;
                s << "transient step " << step << " did not converge (relative residual " << r.relative_residual
                  << ")";
                throw ConvergenceError(s.str(), std::move(r.history));
            }
            theta = std::move(r.x);
            guess = theta;
            report.relative_residual = std::max(report.relative_residual, r.relative_residual);

            double storage = 0.0;
            for (std::size_t c = 0; c < n; ++c) storage += sys.capacitance[c] * (theta[c] - prev[c]) / dt;
            double loss = 0.0;
            for (const BoundaryLink& b : sys.boundary) loss += b.conductance * (theta[b.cell] + t_ref - b.t_ref);
            const double defect = std::abs(storage - (power - loss));
            const double scale = std::max({std::abs(power), std::abs(loss), std::abs(storage)});
            if (defect <= std::max(kTransientBalance * scale, kBalanceFloor) || tol <= kTightestTol) {
                report.energy_defect_w = std::max(report.energy_defect_w, defect);
                break;
            }
            tol = std::max(tol * 0.1, kTightestTol);
        }
        record(step);
        if (observer) observer(dt * static_cast<double>(step), temps);
    }
    report.steps = steps;
    report.wall_time_s = seconds_since(t0);
    return {std::move(result), report};
}

}  // namespace thermkit
