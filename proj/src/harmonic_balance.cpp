#include "phaseres/harmonic_balance.hpp"

#include "phaseres/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace phaseres::hb {

void HBProblem::validate() const {
    cfg.validate();
    if (!(forcing >= 0.0)) throw InvalidArgument("forcing amplitude must be non-negative");
    const int kn = resonance.k() * resonance.nu();
    if (n_harmonics < std::max(kn, 9))
        throw InvalidArgument("need at least max(k*nu, 9) = " + std::to_string(std::max(kn, 9)) +
                              " harmonics, got " + std::to_string(n_harmonics));
    if (time_samples < 4 * n_harmonics + 1)
        throw InvalidArgument("need at least 4N+1 = " + std::to_string(4 * n_harmonics + 1) +
                              " time samples, got " + std::to_string(time_samples));
}

Aft::Aft(int n_harmonics, int samples) {
    const int n = 2 * n_harmonics + 1;
    E_.resize(samples, n);
    P_.resize(n, samples);
    for (int m = 0; m < samples; ++m) {
        const double theta = kTwoPi * m / samples;
        E_(m, 0) = 1.0;
        P_(0, m) = 1.0 / samples;
        for (int j = 1; j <= n_harmonics; ++j) {
            const double c = std::cos(j * theta);
            const double s = std::sin(j * theta);
            E_(m, 2 * j - 1) = c;
            E_(m, 2 * j) = s;
            P_(2 * j - 1, m) = 2.0 * c / samples;
            P_(2 * j, m) = 2.0 * s / samples;
        }
    }
}

HBSystem::HBSystem(HBProblem problem)
    : p_(std::move(problem)), aft_(p_.n_harmonics, p_.time_samples) {
    p_.validate();
}

double HBSystem::tolerance() const { return 1e-10 * std::max(1.0, p_.forcing / p_.cfg.mass); }

Eigen::VectorXd HBSystem::residual(const Eigen::VectorXd& x, double omega) const {
    const double w0 = p_.cfg.omega0();
    const double w02 = w0 * w0;
    const double damp = 2.0 * p_.cfg.zeta_bar() * w0;
    const double base = p_.base_freq(omega);
    const double alpha = p_.cfg.alpha();

    Eigen::VectorXd r(x.size());
    r(0) = w02 * x(0);
    for (int j = 1; j <= p_.n_harmonics; ++j) {
        const double jw = j * base;
        const double kk = w02 - jw * jw;
        const double d = damp * jw;
        const double c = x(2 * j - 1);
        const double s = x(2 * j);
        r(2 * j - 1) = kk * c + d * s;
        r(2 * j) = kk * s - d * c;
    }
    if (alpha != 0.0) {
        const Eigen::VectorXd xt = aft_.to_time(x);
        r += alpha * aft_.to_freq(xt.array().cube().matrix());
    }
    r(2 * p_.resonance.nu()) -= p_.forcing / p_.cfg.mass;
    return r;
}

Eigen::MatrixXd HBSystem::jacobian(const Eigen::VectorXd& x, double omega) const {
    const double w0 = p_.cfg.omega0();
    const double w02 = w0 * w0;
    const double damp = 2.0 * p_.cfg.zeta_bar() * w0;
    const double base = p_.base_freq(omega);
    const double alpha = p_.cfg.alpha();
    const int n = p_.size();

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    if (alpha != 0.0) {
        const Eigen::VectorXd xt = aft_.to_time(x);
        const Eigen::VectorXd g = 3.0 * alpha * xt.array().square().matrix();
        J = aft_.projection() * (g.asDiagonal() * aft_.sampling());
    }
    J(0, 0) += w02;
    for (int j = 1; j <= p_.n_harmonics; ++j) {
        const double jw = j * base;
        const double kk = w02 - jw * jw;
        const double d = damp * jw;
        J(2 * j - 1, 2 * j - 1) += kk;
        J(2 * j - 1, 2 * j) += d;
        J(2 * j, 2 * j) += kk;
        J(2 * j, 2 * j - 1) -= d;
    }
    return J;
}

Eigen::VectorXd HBSystem::d_omega(const Eigen::VectorXd& x, double omega) const {
    const double w0 = p_.cfg.omega0();
    const double damp = 2.0 * p_.cfg.zeta_bar() * w0;
    const double nu = p_.resonance.nu();
    const double base = p_.base_freq(omega);

    Eigen::VectorXd r = Eigen::VectorXd::Zero(x.size());
    for (int j = 1; j <= p_.n_harmonics; ++j) {
        const double dkk = -2.0 * j * j * base / nu;
        const double dd = damp * j / nu;
        const double c = x(2 * j - 1);
        const double s = x(2 * j);
        r(2 * j - 1) = dkk * c + dd * s;
        r(2 * j) = dkk * s - dd * c;
    }
    return r;
}

Eigen::VectorXd hb_residual(const HBProblem& problem, const HarmonicSolution& coeffs,
                            double omega) {
    if (coeffs.n_harmonics() != problem.n_harmonics)
        throw InvalidArgument("coefficient vector does not match the problem size");
    return HBSystem(problem).residual(coeffs.to_vector(), omega);
}

namespace {

Eigen::VectorXd resize_guess(const HarmonicSolution& guess, int n_harmonics) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * n_harmonics + 1);
    const Eigen::VectorXd g = guess.to_vector();
    const auto m = std::min<Eigen::Index>(g.size(), x.size());
    x.head(m) = g.head(m);
    return x;
}

}  // namespace

HarmonicSolution hb_solve(const HBSystem& sys, double omega, const HarmonicSolution& initial_guess,
                          int* iterations) {
    const auto& p = sys.problem();
    const double tol = sys.tolerance();
    Eigen::VectorXd x = resize_guess(initial_guess, p.n_harmonics);
    Eigen::VectorXd r = sys.residual(x, omega);
    double norm = r.lpNorm<Eigen::Infinity>();

    for (int it = 0; it <= 50; ++it) {
        if (!std::isfinite(norm)) break;
        if (norm < tol) {
            if (iterations) *iterations = it;
            return HarmonicSolution::from_vector(p.base_freq(omega), x);
        }
        if (it == 50) break;
        const Eigen::MatrixXd J = sys.jacobian(x, omega);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
        const Eigen::VectorXd dx = lu.solve(-r);
        if (!dx.allFinite()) break;

        double lambda = 1.0;
        Eigen::VectorXd xn;
        Eigen::VectorXd rn;
        double nn = 0.0;
        for (int h = 0; h < 12; ++h) {
            xn = x + lambda * dx;
            rn = sys.residual(xn, omega);
            nn = rn.lpNorm<Eigen::Infinity>();
            if (std::isfinite(nn) && nn < norm) break;
            lambda *= 0.5;
        }
        x = std::move(xn);
        r = std::move(rn);
        norm = nn;
    }
    throw NoConvergence("harmonic balance Newton did not converge at omega = " +
                        std::to_string(omega) + " (residual " + std::to_string(norm) + ")");
}

HarmonicSolution hb_solve(const HBProblem& problem, double omega,
                          const HarmonicSolution& initial_guess) {
    return hb_solve(HBSystem(problem), omega, initial_guess);
}

HarmonicSolution linear_seed(const HBProblem& problem, double omega) {
    problem.validate();
    const double w0 = problem.cfg.omega0();
    const double zeta = problem.cfg.zeta_bar();
    const double gamma = problem.forcing / problem.cfg.mass;
    const double den = std::hypot(w0 * w0 - omega * omega, 2.0 * zeta * w0 * omega);
    HarmonicSolution h(problem.base_freq(omega), problem.n_harmonics);
    h.set_polar(problem.resonance.nu(), gamma / den,
                std::atan2(2.0 * zeta * w0 * omega, w0 * w0 - omega * omega));
    return h;
}

HarmonicSolution isola_seed(const HBProblem& problem, double omega, double r, double phi) {
    problem.validate();
    HarmonicSolution h(problem.base_freq(omega), problem.n_harmonics);
    h.coeff(problem.resonance.nu()).sin = gamma_capital(omega, problem.cfg, problem.forcing);
    h.set_polar(problem.resonance.k(), r, phi);
    return h;
}

bool BranchPoint::has_tag(TagKind kind) const {
    return std::any_of(tags.begin(), tags.end(), [&](const Tag& t) { return t.kind == kind; });
}

FloquetResult floquet_multipliers(const HBProblem& problem, const HarmonicSolution& x,
                                  double omega, int steps) {
    const double w0 = problem.cfg.omega0();
    const double w02 = w0 * w0;
    const double damp = 2.0 * problem.cfg.zeta_bar() * w0;
    const double alpha3 = 3.0 * problem.cfg.alpha();
    const double period = kTwoPi * problem.resonance.nu() / omega;
    const double h = period / steps;

    // 3 alpha x^2 on the half-step grid
    std::vector<double> g(static_cast<std::size_t>(2 * steps + 1));
    for (int i = 0; i <= 2 * steps; ++i) {
        const double xv = x.value(0.5 * h * i);
        g[static_cast<std::size_t>(i)] = alpha3 * xv * xv;
    }

    auto rhs = [&](int half_index, const Eigen::Matrix2d& Y) {
        const double stiff = w02 + g[static_cast<std::size_t>(half_index)];
        Eigen::Matrix2d A;
        A << 0.0, 1.0, -stiff, -damp;
        return Eigen::Matrix2d(A * Y);
    };

    Eigen::Matrix2d Y = Eigen::Matrix2d::Identity();
    for (int i = 0; i < steps; ++i) {
        const Eigen::Matrix2d k1 = rhs(2 * i, Y);
        const Eigen::Matrix2d k2 = rhs(2 * i + 1, Y + 0.5 * h * k1);
        const Eigen::Matrix2d k3 = rhs(2 * i + 1, Y + 0.5 * h * k2);
        const Eigen::Matrix2d k4 = rhs(2 * i + 2, Y + h * k3);
        Y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Eigen::EigenSolver<Eigen::Matrix2d> es(Y, false);
    return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

bool stability_hill(const HBProblem& problem, const BranchPoint& point) {
    return floquet_multipliers(problem, point.solution, point.omega).max_modulus() < 1.0 + 1e-6;
}

}  // namespace phaseres::hb
