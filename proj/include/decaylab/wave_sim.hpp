#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "decaylab/damping.hpp"
#include "decaylab/errors.hpp"
#include "decaylab/mesh_field.hpp"

namespace decaylab {

/// Fields of the coupled system at one time level: displacements u, v and
/// velocities p = du/dt, q = dv/dt at the interior nodes.
struct WaveState {
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> p;
    std::vector<double> q;
    double t = 0.0;
};

WaveState zero_state(const Mesh1D& mesh);

/// Everything that stays fixed during a run.
struct WaveSystem {
    Mesh1D mesh;
    CoefficientProfile a;  // damping coefficient
    CoefficientProfile b;  // coupling coefficient
    DampingLaw law;
};

struct SimConfig {
    double dt = 0.0;
    double t_end = 0.0;
    double newton_tol = 1e-12;  // on the sup-norm residual, scaled by max(1, |rhs|_inf)
    int newton_max_iter = 50;
    int record_every = 1;
};

struct EnergyRecord {
    double t = 0.0;
    double E_uv = 0.0;
    double E_high = 0.0;
    double diss_cum = 0.0;
    /// |grad u|^2 + |grad v|^2 + |p|^2 + |q|^2, for the coercivity check.
    double quad_sum = 0.0;
    std::optional<double> X_diag;
};

/// E = 1/2 (|grad u|^2 + |grad v|^2 + |p|^2 + |q|^2) + <b u, v>.
double energy(const WaveState& s, const Mesh1D& mesh, const CoefficientProfile& b);

double quadratic_sum(const WaveState& s, const Mesh1D& mesh);

/// Time derivatives of the velocities taken from the equations:
/// dp/dt = Lap u - b v - a g(p), dq/dt = Lap v - b u.
std::pair<std::vector<double>, std::vector<double>> accelerations(const WaveState& s,
                                                                  const WaveSystem& sys);

/// Energy of (du/dt, dv/dt).
double higher_energy(const WaveState& s, const WaveSystem& sys);

/// Weighted functional
///   phi' (<u,p> + <v,q>) + k1 phi' (<p_t, q> - <q_t, p>) + phi E + k phi' E_high.
double x_functional(const WaveState& s, const WaveSystem& sys, double phi, double phi_prime,
                    double k, double k1);

class StepFailure : public SolverError {
public:
    StepFailure(const std::string& what, int iterations, double residual)
        : SolverError(what), iterations_(iterations), residual_(residual) {}
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    int iterations_;
    double residual_;
};

struct StepInfo {
    int newton_iterations = 0;
    double residual = 0.0;
    /// dt * <a g(p_mid), p_mid>
    double dissipation = 0.0;
};

/// One implicit-midpoint step of (u, v, p, q)' = (p, q, Lap u - b v - a g(p), Lap v - b u).
/// The midpoint velocities solve a nonlinear system by Newton iteration with
/// block-tridiagonal inner solves. Throws StepFailure when Newton does not
/// reach cfg.newton_tol within cfg.newton_max_iter iterations.
WaveState step(const WaveState& s, const WaveSystem& sys, const SimConfig& cfg,
               StepInfo* info = nullptr);

/// Optional X(t) evaluation at record times. `phi` maps t to (phi, phi').
struct XDiagnostic {
    double k = 0.0;
    double k1 = 0.0;
    std::function<std::pair<double, double>(double)> phi;
};

struct SimResult {
    std::vector<EnergyRecord> records;
    WaveState final_state;
    std::size_t steps = 0;
    int retries = 0;
    /// max over steps of |E(new) - E(old) + dissipation|
    double max_step_residual = 0.0;
};

/// Steps from initial.t to t_end, recording at t = 0 and every record_every
/// steps. A failed step is retried once as two half steps.
SimResult simulate(const WaveSystem& sys, const WaveState& initial, const SimConfig& cfg,
                   const XDiagnostic* x_diag = nullptr);

// Initial data built from Fourier modes and Gaussian bumps.

struct ModeTerm {
    int k = 1;
    double amplitude = 0.0;
};

struct GaussTerm {
    double center = 0.5;
    double width = 0.1;
    double amplitude = 0.0;
};

struct FieldSpec {
    std::vector<ModeTerm> modes;
    std::vector<GaussTerm> bumps;
};

struct InitialData {
    FieldSpec u0;
    FieldSpec v0;
    FieldSpec u1;
    FieldSpec v1;
};

std::vector<double> sample_field(const Mesh1D& mesh, const FieldSpec& spec);
WaveState make_initial_state(const Mesh1D& mesh, const InitialData& data);

void validate(const SimConfig& cfg);

}  // namespace decaylab
