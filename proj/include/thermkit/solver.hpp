#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "thermkit/assembly.hpp"
#include "thermkit/grid.hpp"

namespace thermkit {

struct TemperatureField {
    std::vector<double> values;  // K, grid index space
    Fidelity fidelity = Fidelity::Low;
    std::string stack_name;
};

struct SolveReport {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    double wall_time_s = 0.0;
    double energy_defect_w = 0.0;  // worst step for transient solves
    std::size_t steps = 0;         // transient only
};

struct PcgResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> history;  // relative residual after each iteration
    bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient on (A + diag(shift)) x = rhs,
/// starting from `x0` (zeros when empty). Stops once the true relative
/// residual ||rhs - (A+S) x|| / ||rhs|| <= tol. Throws SolverError if
/// p^T A p <= 0 (matrix not SPD). Does not throw on an exhausted budget;
/// check `converged`.
PcgResult pcg(const CsrMatrix& a, std::span<const double> shift, std::span<const double> rhs,
              std::span<const double> x0, double tol, std::size_t max_iter);

struct SteadyOptions {
    double tol = 1e-8;
    /// 0 selects default_max_iter(n).
    std::size_t max_iter = 0;
};

std::size_t default_max_iter(std::size_t n);

/// Solves A T = q V + b_bc for the source density `q` (W/m^3). The returned
/// field satisfies the energy balance to 1e-6 of the injected power.
/// Throws ConvergenceError when the budget runs out.
std::pair<TemperatureField, SolveReport> solve_steady(const SparseSystem& sys, std::span<const double> q,
                                                      const SteadyOptions& opts = {});

struct TransientOptions {
    double t_end = 1.0;
    double dt = 0.0;  // 0 selects default_time_step(grid)
    /// Frames at evenly spaced times including t = 0 and t_end; 0 keeps every step.
    int frames = 0;
    double tol = 1e-8;
    std::size_t max_iter = 0;
    /// Initial temperature; empty means uniform `t_initial`.
    std::vector<double> t0;
    double t_initial = 293.15;
};

struct TransientResult {
    std::vector<TemperatureField> frames;
    std::vector<double> times;
};

/// Called after every backward-Euler step with (t, T).
using StepObserver = std::function<void(double, std::span<const double>)>;

/// Backward Euler: (C/dt + A) T^{n+1} = (C/dt) T^n + q^{n+1} V + b_bc, where
/// q^{n+1} is the schedule segment active at the step midpoint.
std::pair<TransientResult, SolveReport> solve_transient(const SparseSystem& sys, const SourceSchedule& sources,
                                                        const TransientOptions& opts,
                                                        const StepObserver& observer = {});

/// One tenth of the smallest per-layer lumped time constant c_v t^2 / k_z.
double default_time_step(const VoxelGrid& grid);

/// Net power into the domain: sum(q V) + sum over boundary links of
/// G (t_ref - T).
double energy_balance(const SparseSystem& sys, std::span<const double> q, std::span<const double> t);

}  // namespace thermkit
