#include "phaseres/closed_form.hpp"
#include "phaseres/errors.hpp"
#include "phaseres/harmonic_balance.hpp"
#include "phaseres/slow_flow.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace phaseres::hb {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Bordered Newton corrector on the hyperplane t.(y - pred) = 0.
std::optional<std::pair<VectorXd, int>> correct(const HBSystem& sys, const VectorXd& pred,
                                                const VectorXd& t, int max_iter = 12) {
    const auto n = static_cast<Eigen::Index>(sys.problem().size());
    const double tol = sys.tolerance();
    VectorXd y = pred;
    for (int it = 0; it <= max_iter; ++it) {
        const VectorXd x = y.head(n);
        const double w = y(n);
        const VectorXd R = sys.residual(x, w);
        const double c = t.dot(y - pred);
        if (!R.allFinite()) return std::nullopt;
        if (R.lpNorm<Eigen::Infinity>() < tol && std::abs(c) < 1e-12) return {{y, it}};
        if (it == max_iter) break;
        MatrixXd A(n + 1, n + 1);
        A.topLeftCorner(n, n) = sys.jacobian(x, w);
        A.topRightCorner(n, 1) = sys.d_omega(x, w);
        A.bottomRows(1) = t.transpose();
        VectorXd rhs(n + 1);
        rhs.head(n) = -R;
        rhs(n) = -c;
        const VectorXd dy = A.partialPivLu().solve(rhs);
        if (!dy.allFinite()) return std::nullopt;
        y += dy;
    }
    return std::nullopt;
}

/// Unit tangent of the solution curve at y, oriented along `previous`.
VectorXd tangent_at(const HBSystem& sys, const VectorXd& y, const VectorXd& previous) {
    const auto n = static_cast<Eigen::Index>(sys.problem().size());
    MatrixXd A(n + 1, n + 1);
    A.topLeftCorner(n, n) = sys.jacobian(y.head(n), y(n));
    A.topRightCorner(n, 1) = sys.d_omega(y.head(n), y(n));
    A.bottomRows(1) = previous.transpose();
    VectorXd e = VectorXd::Zero(n + 1);
    e(n) = 1.0;
    VectorXd z = A.partialPivLu().solve(e);
    return z / z.norm();
}

double accurate_max_displacement(const HarmonicSolution& h) {
    constexpr int kSamples = 2048;
    const double period = kTwoPi / h.base_freq();
    const double dt = period / kSamples;
    int best = 0;
    double best_v = -1.0;
    std::vector<double> v(kSamples);
    for (int i = 0; i < kSamples; ++i) {
        v[static_cast<std::size_t>(i)] = std::abs(h.value(i * dt));
        if (v[static_cast<std::size_t>(i)] > best_v) {
            best_v = v[static_cast<std::size_t>(i)];
            best = i;
        }
    }
    // parabolic refinement through the neighbours
    const double a = v[static_cast<std::size_t>((best + kSamples - 1) % kSamples)];
    const double c = v[static_cast<std::size_t>((best + 1) % kSamples)];
    const double den = a - 2.0 * best_v + c;
    if (den < 0.0) {
        const double off = 0.5 * (a - c) / den;
        return std::max(best_v, std::abs(h.value((best + off) * dt)));
    }
    return best_v;
}

BranchPoint make_point(const HBSystem& sys, const VectorXd& y, double tangent_omega,
                       double arclength, bool stability) {
    const auto& p = sys.problem();
    const auto n = static_cast<Eigen::Index>(p.size());
    BranchPoint bp;
    bp.omega = y(n);
    bp.solution = HarmonicSolution::from_vector(p.base_freq(bp.omega), y.head(n));
    bp.max_displacement = accurate_max_displacement(bp.solution);
    bp.arclength = arclength;
    bp.tangent_omega = tangent_omega;
    if (stability) bp.stable = stability_hill(p, bp);
    return bp;
}

VectorXd pack(const BranchPoint& bp) {
    const VectorXd x = bp.solution.to_vector();
    VectorXd y(x.size() + 1);
    y.head(x.size()) = x;
    y(x.size()) = bp.omega;
    return y;
}

double even_norm(const VectorXd& x, int n_harmonics) {
    double s = x(0) * x(0);
    for (int j = 2; j <= n_harmonics; j += 2) s += x(2 * j - 1) * x(2 * j - 1) + x(2 * j) * x(2 * j);
    return std::sqrt(s);
}

Branch run_continuation(const HBSystem& sys, VectorXd y, VectorXd t, double omega_min,
                        double omega_max, const ContinuationOptions& opts,
                        double symmetric_stop = 0.0) {
    const auto& p = sys.problem();
    const auto n = static_cast<Eigen::Index>(p.size());
    const StepControl& sc = opts.step;

    Branch branch;
    branch.points.push_back(make_point(sys, y, t(n), 0.0, opts.compute_stability));
    const VectorXd y0 = y;
    double h = std::min(sc.initial, sc.max);
    double travelled = 0.0;
    double far = 0.0;
    double max_even = even_norm(y.head(n), p.n_harmonics);

    while (static_cast<int>(branch.points.size()) < sc.max_points) {
        if (opts.max_arclength > 0.0 && travelled >= opts.max_arclength) break;
        const VectorXd pred = y + h * t;
        auto corr = correct(sys, pred, t);
        bool ok = corr.has_value();
        VectorXd yn;
        VectorXd tn;
        if (ok) {
            yn = corr->first;
            ok = (yn - y).norm() <= 2.0 * h;
        }
        if (ok) {
            tn = tangent_at(sys, yn, t);
            ok = tn.allFinite() && (tn.dot(t) > 0.7 || h <= 10.0 * sc.min);
        }
        if (!ok) {
            h *= 0.5;
            if (h < sc.min) break;
            continue;
        }

        const double ds = (yn - y).norm();
        if (yn(n) < omega_min || yn(n) > omega_max) break;
        travelled += ds;
        BranchPoint bp = make_point(sys, yn, tn(n), travelled, opts.compute_stability);

        // fold: omega component of the tangent changes sign
        if ((t(n) > 0.0) != (tn(n) > 0.0)) {
            auto& prev = branch.points.back();
            if (std::abs(prev.tangent_omega) < std::abs(tn(n))) {
                prev.tags.push_back({TagKind::Fold, 0});
            } else {
                bp.tags.push_back({TagKind::Fold, 0});
            }
        }
        branch.points.push_back(std::move(bp));
        y = yn;
        t = tn;

        const double dist = (y - y0).norm();
        far = std::max(far, dist);
        if (far > 4.0 * h && travelled > 2.0 * far && dist < 1.5 * h) {
            branch.closed = true;
            break;
        }
        if (symmetric_stop > 0.0) {
            const double en = even_norm(y.head(n), p.n_harmonics);
            max_even = std::max(max_even, en);
            if (max_even > 4.0 * symmetric_stop && en < 0.5 * symmetric_stop) break;
        }
        if (corr->second <= sc.fast_iterations) h = std::min(h * sc.grow, sc.max);
    }
    return branch;
}

/// Solution on the hyperplane through ya + s (yb - ya) normal to the chord.
std::optional<VectorXd> point_on_chord(const HBSystem& sys, const VectorXd& ya, const VectorXd& yb,
                                       double s) {
    const VectorXd d = yb - ya;
    const double len = d.norm();
    if (len == 0.0) return ya;
    auto c = correct(sys, ya + s * d, d / len, 30);
    if (!c) return std::nullopt;
    return c->first;
}

double harmonic_metric(const VectorXd& y, int harmonic, double base) {
    if (harmonic == 0) {
        const auto n = y.size() - 1;
        return accurate_max_displacement(HarmonicSolution::from_vector(base, y.head(n)));
    }
    return std::hypot(y(2 * harmonic - 1), y(2 * harmonic));
}

}  // namespace

Branch continue_branch(const HBProblem& problem, double omega_start, double omega_min,
                       double omega_max, const ContinuationOptions& opts,
                       const std::optional<HarmonicSolution>& guess) {
    const HBSystem sys(problem);
    if (!(omega_min < omega_max) || omega_start < omega_min || omega_start > omega_max)
        throw InvalidArgument("omega_start must lie inside [omega_min, omega_max]");
    const HarmonicSolution x0 =
        hb_solve(sys, omega_start, guess ? *guess : linear_seed(problem, omega_start));

    const auto n = static_cast<Eigen::Index>(problem.size());
    VectorXd y(n + 1);
    y.head(n) = x0.to_vector();
    y(n) = omega_start;
    VectorXd seed_dir = VectorXd::Zero(n + 1);
    seed_dir(n) = opts.direction >= 0 ? 1.0 : -1.0;
    VectorXd t = tangent_at(sys, y, seed_dir);
    return run_continuation(sys, y, t, omega_min, omega_max, opts);
}

std::vector<BranchPoint> detect_phase_resonance(const HBProblem& problem, const Branch& branch,
                                                const ResonanceId& res) {
    if (res.nu() != problem.resonance.nu())
        throw InvalidArgument("branch was computed for a different subharmonic window");
    const int k = res.k();
    if (k > problem.n_harmonics) throw InvalidArgument("harmonic k is not represented");
    const HBSystem sys(problem);
    const auto n = static_cast<Eigen::Index>(problem.size());

    std::vector<VectorXd> ys;
    ys.reserve(branch.points.size());
    double amax = 0.0;
    for (const auto& bp : branch.points) {
        ys.push_back(pack(bp));
        amax = std::max(amax, bp.solution.amplitude(k));
    }
    const double amin = std::max(1e-12, 1e-6 * amax);

    std::vector<BranchPoint> out;
    for (double target : equivalent_phase_lags(res)) {
        const double ct = std::cos(target);
        const double st = std::sin(target);
        // A_k sin(target - phi_k) and A_k cos(target - phi_k)
        auto fval = [&](const VectorXd& y) { return y(2 * k - 1) * ct + y(2 * k) * st; };
        auto gval = [&](const VectorXd& y) { return y(2 * k) * ct - y(2 * k - 1) * st; };

        for (std::size_t i = 1; i < ys.size(); ++i) {
            const VectorXd& ya = ys[i - 1];
            const VectorXd& yb = ys[i];
            double fa = fval(ya);
            double fb = fval(yb);
            if (!(fa * fb < 0.0 || (fb == 0.0 && fa != 0.0))) continue;
            if (gval(ya) <= amin || gval(yb) <= amin) continue;

            // Illinois secant on the chord parameter
            double sa = 0.0, sb = 1.0;
            std::optional<VectorXd> best;
            int side = 0;
            for (int it = 0; it < 80; ++it) {
                const double s = (fb == fa) ? 0.5 * (sa + sb) : (sa * fb - sb * fa) / (fb - fa);
                auto yc = point_on_chord(sys, ya, yb, std::clamp(s, 0.0, 1.0));
                if (!yc) break;
                const double fc = fval(*yc);
                const double amp = std::hypot((*yc)(2 * k - 1), (*yc)(2 * k));
                best = yc;
                if (std::abs(fc) <= 1e-10 * amp) break;
                if ((fc < 0.0) == (fa < 0.0)) {
                    sa = s;
                    fa = fc;
                    if (side == -1) fb *= 0.5;
                    side = -1;
                } else {
                    sb = s;
                    fb = fc;
                    if (side == +1) fa *= 0.5;
                    side = +1;
                }
            }
            if (!best) continue;
            const double phi = wrap_two_pi(std::atan2(-(*best)(2 * k - 1), (*best)(2 * k)));
            if (std::abs(wrap_pi(phi - target)) >= 1e-8) continue;

            const double s_len = (*best - ya).norm();
            const VectorXd tb = tangent_at(sys, *best, yb - ya);
            BranchPoint bp = make_point(sys, *best, tb(n),
                                        branch.points[i - 1].arclength + s_len, true);
            bp.tags.push_back({TagKind::PhaseResonance, k});
            out.push_back(std::move(bp));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const BranchPoint& a, const BranchPoint& b) { return a.arclength < b.arclength; });
    return out;
}

void merge_points(Branch& branch, const std::vector<BranchPoint>& extra) {
    for (const auto& bp : extra) {
        auto it = std::upper_bound(
            branch.points.begin(), branch.points.end(), bp.arclength,
            [](double s, const BranchPoint& q) { return s < q.arclength; });
        branch.points.insert(it, bp);
    }
}

namespace {

double metric_of(const BranchPoint& bp, int harmonic) {
    return harmonic == 0 ? bp.max_displacement : bp.solution.amplitude(harmonic);
}

/// Golden-section refinement of the metric over the chords adjacent to point i.
BranchPoint refine_maximum(const HBSystem& sys, const Branch& branch, std::size_t imax,
                           int harmonic) {
    const auto& problem = sys.problem();
    const auto n = static_cast<Eigen::Index>(problem.size());
    VectorXd best_y = pack(branch.points[imax]);
    double best_m = metric_of(branch.points[imax], harmonic);
    double best_s = branch.points[imax].arclength;

    auto search = [&](std::size_t ia, std::size_t ib) {
        const VectorXd ya = pack(branch.points[ia]);
        const VectorXd yb = pack(branch.points[ib]);
        const double len = (yb - ya).norm();
        auto eval = [&](double s) -> double {
            auto y = point_on_chord(sys, ya, yb, s);
            if (!y) return -1.0;
            const double m = harmonic_metric(*y, harmonic, problem.base_freq((*y)(n)));
            if (m > best_m) {
                best_m = m;
                best_y = *y;
                best_s = branch.points[ia].arclength + s * len;
            }
            return m;
        };
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = 0.0, b = 1.0;
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = eval(c), fd = eval(d);
        for (int it = 0; it < 50 && (b - a) > 1e-9; ++it) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = eval(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = eval(d);
            }
        }
    };
    if (imax > 0) search(imax - 1, imax);
    if (imax + 1 < branch.points.size()) search(imax, imax + 1);

    const VectorXd tb = tangent_at(sys, best_y, VectorXd::Unit(n + 1, n));
    return make_point(sys, best_y, tb(n), best_s, true);
}

void check_harmonic(const HBProblem& problem, const Branch& branch, int harmonic) {
    if (branch.points.empty()) throw InvalidArgument("empty branch");
    if (harmonic < 0 || harmonic > problem.n_harmonics)
        throw InvalidArgument("harmonic index out of range");
}

}  // namespace

BranchPoint branch_maximum(const HBProblem& problem, const Branch& branch, int harmonic) {
    check_harmonic(problem, branch, harmonic);
    const HBSystem sys(problem);
    std::size_t imax = 0;
    for (std::size_t i = 1; i < branch.points.size(); ++i)
        if (metric_of(branch.points[i], harmonic) > metric_of(branch.points[imax], harmonic))
            imax = i;
    return refine_maximum(sys, branch, imax, harmonic);
}

std::vector<BranchPoint> local_maxima(const HBProblem& problem, const Branch& branch,
                                      int harmonic) {
    check_harmonic(problem, branch, harmonic);
    const HBSystem sys(problem);
    std::vector<BranchPoint> out;
    const std::size_t np = branch.points.size();
    for (std::size_t i = 1; i + 1 < np; ++i) {
        const double m = metric_of(branch.points[i], harmonic);
        if (m >= metric_of(branch.points[i - 1], harmonic) &&
            m > metric_of(branch.points[i + 1], harmonic))
            out.push_back(refine_maximum(sys, branch, i, harmonic));
    }
    if (branch.closed && np > 2) {
        const double m = metric_of(branch.points[0], harmonic);
        if (m >= metric_of(branch.points[np - 1], harmonic) &&
            m > metric_of(branch.points[1], harmonic))
            out.push_back(refine_maximum(sys, branch, 0, harmonic));
    }
    return out;
}

namespace {

std::vector<Eigen::Index> even_indices(int n_harmonics) {
    std::vector<Eigen::Index> idx{0};
    for (int j = 2; j <= n_harmonics; j += 2) {
        idx.push_back(2 * j - 1);
        idx.push_back(2 * j);
    }
    return idx;
}

MatrixXd even_block(const HBSystem& sys, const VectorXd& y) {
    const auto n = static_cast<Eigen::Index>(sys.problem().size());
    const MatrixXd J = sys.jacobian(y.head(n), y(n));
    const auto idx = even_indices(sys.problem().n_harmonics);
    const auto m = static_cast<Eigen::Index>(idx.size());
    MatrixXd B(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) B(a, b) = J(idx[a], idx[b]);
    return B;
}

int det_sign(const MatrixXd& B) {
    const double d = B.partialPivLu().determinant();
    return d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
}

}  // namespace

std::vector<BranchPoint> symmetry_breaking_points(const HBProblem& problem, const Branch& branch) {
    const HBSystem sys(problem);
    const auto n = static_cast<Eigen::Index>(problem.size());
    std::vector<BranchPoint> out;
    if (branch.points.size() < 2) return out;

    VectorXd yprev = pack(branch.points.front());
    int sprev = det_sign(even_block(sys, yprev));
    for (std::size_t i = 1; i < branch.points.size(); ++i) {
        const VectorXd ycur = pack(branch.points[i]);
        const int scur = det_sign(even_block(sys, ycur));
        if (scur != 0 && sprev != 0 && scur != sprev) {
            double a = 0.0, b = 1.0;
            VectorXd ybest = ycur;
            for (int it = 0; it < 60; ++it) {
                const double m = 0.5 * (a + b);
                auto y = point_on_chord(sys, yprev, ycur, m);
                if (!y) break;
                ybest = *y;
                if (det_sign(even_block(sys, *y)) == sprev) a = m; else b = m;
                if (b - a < 1e-12) break;
            }
            const VectorXd tb = tangent_at(sys, ybest, ycur - yprev);
            out.push_back(make_point(sys, ybest, tb(n),
                                     branch.points[i - 1].arclength + (ybest - yprev).norm(),
                                     true));
        }
        yprev = ycur;
        sprev = scur;
    }
    return out;
}

Branch switch_branch(const HBProblem& problem, const BranchPoint& bif, double omega_min,
                     double omega_max, const ContinuationOptions& opts) {
    const HBSystem sys(problem);
    const auto n = static_cast<Eigen::Index>(problem.size());
    const VectorXd ystar = pack(bif);

    const MatrixXd B = even_block(sys, ystar);
    Eigen::JacobiSVD<MatrixXd> svd(B, Eigen::ComputeFullV);
    const VectorXd ve = svd.matrixV().col(B.cols() - 1);
    const auto idx = even_indices(problem.n_harmonics);
    VectorXd v = VectorXd::Zero(n);
    for (std::size_t a = 0; a < idx.size(); ++a) v(idx[a]) = ve(static_cast<Eigen::Index>(a));

    const double eps = 1e-3 * std::max(1.0, ystar.head(n).norm());
    // R(x, omega) = 0 together with v.(x - x*) = eps
    VectorXd y = ystar;
    y.head(n) += eps * v;
    bool converged = false;
    for (int it = 0; it < 40; ++it) {
        const VectorXd R = sys.residual(y.head(n), y(n));
        const double c = v.dot(y.head(n) - ystar.head(n)) - eps;
        if (R.lpNorm<Eigen::Infinity>() < sys.tolerance() && std::abs(c) < 1e-13) {
            converged = true;
            break;
        }
        MatrixXd A = MatrixXd::Zero(n + 1, n + 1);
        A.topLeftCorner(n, n) = sys.jacobian(y.head(n), y(n));
        A.topRightCorner(n, 1) = sys.d_omega(y.head(n), y(n));
        A.block(n, 0, 1, n) = v.transpose();
        VectorXd rhs(n + 1);
        rhs.head(n) = -R;
        rhs(n) = -c;
        const VectorXd dy = A.partialPivLu().solve(rhs);
        if (!dy.allFinite()) break;
        y += dy;
    }
    if (!converged) throw NoConvergence("could not leave the symmetric branch at the bifurcation");

    VectorXd dir = VectorXd::Zero(n + 1);
    dir.head(n) = v;
    const VectorXd t = tangent_at(sys, y, dir);
    return run_continuation(sys, y, t, omega_min, omega_max, opts, eps);
}

std::optional<Branch> find_isola(const HBProblem& problem, double omega_min, double omega_max,
                                 const ContinuationOptions& opts, int n_grid) {
    const ResonanceId& res = problem.resonance;
    if (res.nu() == 1)
        throw UnsupportedFamily("isola search needs a subharmonic window (nu > 1)");
    const HBSystem sys(problem);
    const slow_flow::SlowFlowSystem sf(res);

    std::vector<double> omegas;
    if (res.k() == 1 && (res.nu() == 2 || res.nu() == 3)) {
        for (const auto& lp : closed_form::locus_points_at_forcing(res, problem.cfg, problem.forcing,
                                                                   omega_min, omega_max))
            omegas.push_back(lp.omega_p);
    }
    for (int i = 0; i < n_grid; ++i)
        omegas.push_back(omega_min + (omega_max - omega_min) * (i + 0.5) / n_grid);

    auto both_ways = [&](double w, const HarmonicSolution& sol) {
        ContinuationOptions fwd = opts;
        fwd.direction = +1;
        Branch b = continue_branch(problem, w, omega_min, omega_max, fwd, sol);
        if (b.closed) return b;
        ContinuationOptions bwd = opts;
        bwd.direction = -1;
        Branch back = continue_branch(problem, w, omega_min, omega_max, bwd, sol);
        // reversed backward run, then the forward run without its duplicate start
        Branch merged;
        const double total = back.points.back().arclength;
        for (auto it = back.points.rbegin(); it != back.points.rend(); ++it) {
            BranchPoint q = *it;
            q.arclength = total - q.arclength;
            q.tangent_omega = -q.tangent_omega;
            merged.points.push_back(std::move(q));
        }
        for (std::size_t i = 1; i < b.points.size(); ++i) {
            BranchPoint q = b.points[i];
            q.arclength += total;
            merged.points.push_back(std::move(q));
        }
        return merged;
    };

    const double w0 = problem.cfg.omega0();
    auto near_linear = [&](double w) { return std::abs(w * w - w0 * w0) < 1e-3 * w0 * w0; };
    for (double w : omegas) {
        if (near_linear(w)) continue;
        std::vector<slow_flow::SteadyState> states;
        try {
            states = slow_flow::find_steady_states(sf, w, problem.cfg, problem.forcing);
        } catch (const Error&) {
            continue;
        }
        for (const auto& st : states) {
            if (st.state.r < 1e-6) continue;
            HarmonicSolution sol;
            try {
                sol = hb_solve(sys, w, isola_seed(problem, w, st.state.r, st.state.phi));
            } catch (const NoConvergence&) {
                continue;
            }
            if (sol.amplitude(res.k()) < 1e-3 * st.state.r) continue;
            return both_ways(w, sol);
        }
    }

    // No slow-flow seed converged (3:2 has no averaged window at all): try a
    // polar grid of harmonic-k seeds directly on a coarser frequency grid.
    const int n_coarse = std::max(1, n_grid / 5);
    for (int i = 0; i < n_coarse; ++i) {
        const double w = omega_min + (omega_max - omega_min) * (i + 0.5) / n_coarse;
        if (near_linear(w)) continue;
        for (double r : {0.2, 0.4, 0.7, 1.0, 1.5, 2.0, 3.0}) {
            for (int j = 0; j < 24; ++j) {
                HarmonicSolution sol;
                try {
                    sol = hb_solve(sys, w, isola_seed(problem, w, r, j * kTwoPi / 24));
                } catch (const NoConvergence&) {
                    continue;
                }
                if (sol.amplitude(res.k()) < 1e-3) continue;
                return both_ways(w, sol);
            }
        }
    }
    return std::nullopt;
}

}  // namespace phaseres::hb
