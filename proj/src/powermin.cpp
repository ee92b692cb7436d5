#include "nfisac/powermin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nfisac {

namespace {

// Orthonormal Hermitian basis under <X,Y> = Re tr(X^H Y): D diagonal
// matrices, then for each pair i<j a real-coupling and an imaginary-coupling
// matrix. Coordinates in this basis keep the barrier algebra real.
std::vector<CMatrix> herm_basis(int d) {
    std::vector<CMatrix> basis;
    basis.reserve(static_cast<size_t>(d) * d);
    for (int i = 0; i < d; ++i) {
        CMatrix b = CMatrix::Zero(d, d);
        b(i, i) = 1.0;
        basis.push_back(std::move(b));
    }
    const double h = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            CMatrix br = CMatrix::Zero(d, d);
            br(i, j) = h;
            br(j, i) = h;
            basis.push_back(std::move(br));
            CMatrix bi = CMatrix::Zero(d, d);
            bi(i, j) = cdouble(0.0, h);
            bi(j, i) = cdouble(0.0, -h);
            basis.push_back(std::move(bi));
        }
    }
    return basis;
}

CMatrix assemble(const std::vector<CMatrix>& basis, const RVector& coords) {
    CMatrix f = CMatrix::Zero(basis[0].rows(), basis[0].cols());
    for (size_t a = 0; a < basis.size(); ++a)
        f += coords(static_cast<Eigen::Index>(a)) * basis[a];
    return f;
}

double herm_inner(const CMatrix& x, const CMatrix& y) {
    return x.cwiseProduct(y.conjugate()).sum().real();
}

struct BarrierProblem {
    int dim = 0;     // reduced dimension D
    int blocks = 0;  // K
    std::vector<CMatrix> basis;          // D^2 Hermitian basis matrices
    RMatrix coeff;                       // J x n, row-normalized
    RVector rhs;                         // J
    RVector obj;                         // n, objective sum_k tr(F_k)
    std::vector<std::string> names;      // J
    double scale = 1.0;                  // lifted F = scale * reduced F

    int vars() const { return blocks * dim * dim; }
    int constraints() const { return static_cast<int>(rhs.size()); }
};

struct CenteringResult {
    bool psd_ok = true;
};

// One Newton centering pass for min t*(linear) + barrier. In phase 1 the
// variable vector is [x; u] and every slack gains +u, plus a trace cap that
// keeps the phase-1 problem bounded.
class Barrier {
  public:
    Barrier(const BarrierProblem& p, bool phase1, double cap)
        : p_(p), phase1_(phase1), cap_(cap), nb_(p.dim * p.dim) {}

    int total_vars() const { return p_.vars() + (phase1_ ? 1 : 0); }

    // Merit t * linear + barrier; +inf outside the domain.
    double merit(const RVector& z, double t) const {
        double val = t * linear(z);
        for (int k = 0; k < p_.blocks; ++k) {
            const CMatrix f = block(z, k);
            const Eigen::LLT<CMatrix> llt(f);
            if (llt.info() != Eigen::Success)
                return std::numeric_limits<double>::infinity();
            const CMatrix l = llt.matrixL();
            double logdet = 0.0;
            for (Eigen::Index i = 0; i < f.rows(); ++i) {
                const double lii = std::real(l(i, i));
                if (!(lii > 0.0)) return std::numeric_limits<double>::infinity();
                logdet += 2.0 * std::log(lii);
            }
            val -= logdet;
        }
        for (int j = 0; j < p_.constraints(); ++j) {
            const double s = slack(z, j);
            if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
            val -= std::log(s);
        }
        if (phase1_) {
            const double s = cap_slack(z);
            if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
            val -= std::log(s);
        }
        return val;
    }

    double linear(const RVector& z) const {
        return phase1_ ? z(z.size() - 1) : p_.obj.dot(z);
    }

    CMatrix block(const RVector& z, int k) const {
        return assemble(p_.basis, z.segment(static_cast<Eigen::Index>(k) * nb_, nb_));
    }

    double slack(const RVector& z, int j) const {
        const double base = p_.coeff.row(j).dot(z.head(p_.vars())) - p_.rhs(j);
        return phase1_ ? base + z(z.size() - 1) : base;
    }

    double cap_slack(const RVector& z) const {
        return cap_ - p_.obj.dot(z.head(p_.vars()));
    }

    void gradient_hessian(const RVector& z, double t, RVector& grad, RMatrix& hess) const {
        const int n = total_vars();
        const int nx = p_.vars();
        grad = RVector::Zero(n);
        hess = RMatrix::Zero(n, n);

        if (phase1_)
            grad(n - 1) = t;
        else
            grad.head(nx) = t * p_.obj;

        // log-det terms, block diagonal in x.
        for (int k = 0; k < p_.blocks; ++k) {
            const CMatrix f = block(z, k);
            const CMatrix finv = f.inverse();
            std::vector<CMatrix> c(static_cast<size_t>(nb_));
            for (int a = 0; a < nb_; ++a)
                c[static_cast<size_t>(a)] = finv * p_.basis[static_cast<size_t>(a)];
            const int base = k * nb_;
            for (int a = 0; a < nb_; ++a) {
                grad(base + a) -= c[static_cast<size_t>(a)].trace().real();
                for (int b = a; b < nb_; ++b) {
                    const double hij =
                        (c[static_cast<size_t>(a)] * c[static_cast<size_t>(b)]).trace().real();
                    hess(base + a, base + b) += hij;
                    if (b != a) hess(base + b, base + a) += hij;
                }
            }
        }

        // slack terms.
        for (int j = 0; j < p_.constraints(); ++j) {
            const double s = slack(z, j);
            RVector row = RVector::Zero(n);
            row.head(nx) = p_.coeff.row(j).transpose();
            if (phase1_) row(n - 1) = 1.0;
            grad -= row / s;
            hess += row * row.transpose() / (s * s);
        }
        if (phase1_) {
            const double s = cap_slack(z);
            RVector row = RVector::Zero(n);
            row.head(nx) = -p_.obj;
            grad -= row / s;
            hess += row * row.transpose() / (s * s);
        }
    }

    // Damped Newton to the central point for this t.
    void center(RVector& z, double t, int max_steps) const {
        RVector grad;
        RMatrix hess;
        for (int it = 0; it < max_steps; ++it) {
            gradient_hessian(z, t, grad, hess);
            // Tiny Tikhonov term keeps the factorization honest when the
            // central path flattens.
            hess.diagonal().array() += 1e-13 * (1.0 + hess.diagonal().maxCoeff());
            const RVector step = hess.ldlt().solve(-grad);
            const double decrement = -grad.dot(step);
            if (!(decrement > 0.0)) break;

            const double f0 = merit(z, t);
            double alpha = 1.0;
            RVector cand = z + alpha * step;
            while (alpha > 1e-14 &&
                   !(merit(cand, t) <= f0 - 0.01 * alpha * decrement)) {
                alpha *= 0.5;
                cand = z + alpha * step;
            }
            if (alpha <= 1e-14) break;
            z = cand;
            if (decrement * alpha < 1e-13) break;
        }
    }

  private:
    const BarrierProblem& p_;
    bool phase1_;
    double cap_;
    int nb_;
};

// Coordinates of rho * I for every block.
RVector identity_start(const BarrierProblem& p, double rho) {
    RVector x = RVector::Zero(p.vars());
    const int nb = p.dim * p.dim;
    for (int k = 0; k < p.blocks; ++k)
        for (int i = 0; i < p.dim; ++i)
            x(k * nb + i) = rho;
    return x;
}

}  // namespace

CMatrix reduction_basis(const ChannelMatrix& design, const CVector& a_target) {
    const Eigen::Index nt = design.rows.cols();
    if (a_target.size() != nt)
        throw std::invalid_argument("reduction_basis: target vector size mismatch");
    CMatrix span(nt, design.rows.rows() + 1);
    for (int k = 0; k < design.users(); ++k) span.col(k) = design.user(k);
    span.col(design.rows.rows()) = a_target;

    const SvdResult s = svd(span);
    const double smax = s.singular_values.size() ? s.singular_values(0) : 0.0;
    const double tol = static_cast<double>(std::max(span.rows(), span.cols())) * smax *
                       std::numeric_limits<double>::epsilon() * 16.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.singular_values.size(); ++i)
        if (s.singular_values(i) > tol) ++rank;
    if (rank == 0)
        throw std::invalid_argument("reduction_basis: all channels and target vector are zero");
    return s.u.leftCols(rank);
}

std::vector<std::string> qos_names(const QosSpec& qos) {
    std::vector<std::string> names;
    for (size_t k = 0; k < qos.sinr_floors.size(); ++k)
        if (qos.sinr_floors[k] > 0.0)
            names.push_back("sinr_floor[user " + std::to_string(k) + "]");
    if (qos.beampattern_floor > 0.0)
        names.emplace_back("beampattern_floor");
    return names;
}

std::vector<double> qos_slacks(const ChannelMatrix& design, const CVector& a_target,
                               const QosSpec& qos, const std::vector<CMatrix>& blocks) {
    if (blocks.size() != qos.sinr_floors.size())
        throw std::invalid_argument("qos_slacks: block count mismatch");
    std::vector<double> slacks;
    const int k_users = design.users();
    for (int k = 0; k < k_users; ++k) {
        const double gamma = qos.sinr_floors[static_cast<size_t>(k)];
        if (gamma <= 0.0) continue;
        const CVector h = design.user(k);
        double own = 0.0, other = 0.0;
        for (size_t i = 0; i < blocks.size(); ++i) {
            const double q = std::real((h.adjoint() * blocks[i] * h)(0, 0));
            if (static_cast<int>(i) == k)
                own = q;
            else
                other += q;
        }
        slacks.push_back(own - gamma * (other + qos.noise_power));
    }
    if (qos.beampattern_floor > 0.0) {
        double g = 0.0;
        for (const auto& f : blocks)
            g += std::real((a_target.adjoint() * f * a_target)(0, 0));
        slacks.push_back(g - qos.beampattern_floor);
    }
    return slacks;
}

namespace {

struct Recovery {
    bool ok = false;
    std::vector<double> powers;
    double total = 0.0;
};

// Minimal per-direction powers meeting the SINR floors (standard power
// control fixed point, monotone from zero), then a common up-scaling for the
// beampattern floor. Returns not-ok when the direction set cannot satisfy
// the floors.
Recovery rescale_directions(const std::vector<CVector>& dirs, const ChannelMatrix& design,
                            const CVector& a_target, const QosSpec& qos) {
    const size_t k_users = dirs.size();
    Recovery rec;
    RMatrix gain(k_users, k_users);
    RVector beam(static_cast<Eigen::Index>(k_users));
    for (size_t i = 0; i < k_users; ++i) {
        for (size_t k = 0; k < k_users; ++k)
            gain(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
                std::norm((design.user(static_cast<int>(k)).adjoint() * dirs[i])(0, 0));
        beam(static_cast<Eigen::Index>(i)) = std::norm((a_target.adjoint() * dirs[i])(0, 0));
    }

    std::vector<double> p(k_users, 0.0);
    for (int it = 0; it < 2000; ++it) {
        double change = 0.0, total = 0.0;
        for (size_t k = 0; k < k_users; ++k) {
            const double gamma = qos.sinr_floors[k];
            if (gamma <= 0.0) continue;
            const double own = gain(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
            if (own <= 0.0) return rec;
            double interf = 0.0;
            for (size_t i = 0; i < k_users; ++i)
                if (i != k)
                    interf += gain(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) * p[i];
            const double next = gamma * (interf + qos.noise_power) / own;
            change = std::max(change, std::abs(next - p[k]) / std::max(1.0, next));
            p[k] = next;
            total += next;
        }
        if (!std::isfinite(total) || total > 1e30) return rec;  // floors unattainable
        if (change < 1e-14) break;
        if (it == 1999) return rec;
    }

    if (qos.beampattern_floor > 0.0) {
        double bp = 0.0;
        for (size_t i = 0; i < k_users; ++i) bp += beam(static_cast<Eigen::Index>(i)) * p[i];
        if (bp < qos.beampattern_floor) {
            if (bp > 0.0) {
                const double c = qos.beampattern_floor / bp;
                for (auto& v : p) v *= c;
            } else {
                // No SINR-driven power to scale; point the floor at the best
                // aligned direction.
                Eigen::Index best = 0;
                const double bv = beam.maxCoeff(&best);
                if (bv <= 0.0) return rec;
                p[static_cast<size_t>(best)] += qos.beampattern_floor / bv;
            }
        }
    }

    rec.ok = true;
    rec.powers = std::move(p);
    rec.total = 0.0;
    for (const double v : rec.powers) rec.total += v;
    return rec;
}

}  // namespace

SdpSolution minimize_power(const ChannelMatrix& design, const CVector& a_target,
                           const QosSpec& qos, const SdpOptions& opts, Rng& rng) {
    const int k_users = design.users();
    if (static_cast<int>(qos.sinr_floors.size()) != k_users)
        throw std::invalid_argument("minimize_power: one SINR floor per user required");
    for (const double g : qos.sinr_floors)
        if (g < 0.0 || !std::isfinite(g))
            throw std::invalid_argument("minimize_power: SINR floors must be >= 0");
    if (qos.beampattern_floor < 0.0 || !std::isfinite(qos.beampattern_floor))
        throw std::invalid_argument("minimize_power: beampattern floor must be >= 0");
    if (!(qos.noise_power > 0.0))
        throw std::invalid_argument("minimize_power: noise power must be positive");
    require_finite(design.rows, "minimize_power channels");
    const Eigen::Index nt = design.rows.cols();
    if (a_target.size() != nt)
        throw std::invalid_argument("minimize_power: target vector size mismatch");

    SdpSolution sol;
    sol.blocks.assign(static_cast<size_t>(k_users), CMatrix::Zero(nt, nt));
    sol.rank_ratios.assign(static_cast<size_t>(k_users), 0.0);

    const bool any_sinr =
        std::any_of(qos.sinr_floors.begin(), qos.sinr_floors.end(), [](double g) { return g > 0.0; });
    if (!any_sinr && qos.beampattern_floor <= 0.0) {
        // Nothing constrains the power from below.
        sol.status = SdpStatus::kOptimal;
        sol.recovered = Precoder{CMatrix::Zero(nt, k_users), 0.0};
        return sol;
    }

    // Reduced coordinates.
    const CMatrix v = opts.reduce ? reduction_basis(design, a_target)
                                  : CMatrix::Identity(nt, nt);
    const Eigen::Index d = v.cols();
    std::vector<CVector> h_red(static_cast<size_t>(k_users));
    for (int k = 0; k < k_users; ++k) h_red[static_cast<size_t>(k)] = v.adjoint() * design.user(k);
    const CVector a_red = v.adjoint() * a_target;

    // Power scale so reduced blocks are O(1).
    double scale = 0.0;
    for (int k = 0; k < k_users; ++k) {
        const double hn = h_red[static_cast<size_t>(k)].squaredNorm();
        if (qos.sinr_floors[static_cast<size_t>(k)] > 0.0 && hn > 0.0)
            scale += qos.sinr_floors[static_cast<size_t>(k)] * qos.noise_power / hn;
    }
    if (qos.beampattern_floor > 0.0) {
        const double an = a_red.squaredNorm();
        if (an > 0.0) scale += qos.beampattern_floor / an;
    }
    if (!(scale > 0.0)) scale = 1.0;

    BarrierProblem prob;
    prob.dim = static_cast<int>(d);
    prob.blocks = k_users;
    prob.basis = herm_basis(prob.dim);
    prob.scale = scale;
    prob.names = qos_names(qos);

    const int nb = prob.dim * prob.dim;
    prob.obj = RVector::Zero(prob.vars());
    for (int k = 0; k < k_users; ++k)
        for (int i = 0; i < prob.dim; ++i) prob.obj(k * nb + i) = 1.0;

    // Constraint rows: scaled so rhs is O(1), then row-normalized.
    std::vector<RVector> rows;
    std::vector<double> rhs;
    for (int k = 0; k < k_users; ++k) {
        const double gamma = qos.sinr_floors[static_cast<size_t>(k)];
        if (gamma <= 0.0) continue;
        const CMatrix outer = h_red[static_cast<size_t>(k)] * h_red[static_cast<size_t>(k)].adjoint();
        RVector row = RVector::Zero(prob.vars());
        for (int i = 0; i < k_users; ++i) {
            const double w = (i == k) ? 1.0 : -gamma;
            for (int a = 0; a < nb; ++a)
                row(i * nb + a) = w * herm_inner(outer, prob.basis[static_cast<size_t>(a)]) +
                                  row(i * nb + a);
        }
        rows.push_back(row);
        rhs.push_back(gamma * qos.noise_power / scale);
    }
    if (qos.beampattern_floor > 0.0) {
        const CMatrix outer = a_red * a_red.adjoint();
        RVector row = RVector::Zero(prob.vars());
        for (int i = 0; i < k_users; ++i)
            for (int a = 0; a < nb; ++a)
                row(i * nb + a) = herm_inner(outer, prob.basis[static_cast<size_t>(a)]);
        rows.push_back(row);
        rhs.push_back(qos.beampattern_floor / scale);
    }

    prob.coeff.resize(static_cast<Eigen::Index>(rows.size()), prob.vars());
    prob.rhs.resize(static_cast<Eigen::Index>(rows.size()));
    for (size_t j = 0; j < rows.size(); ++j) {
        const double nrm = std::max({rows[j].norm(), std::abs(rhs[j]), 1e-30});
        prob.coeff.row(static_cast<Eigen::Index>(j)) = rows[j] / nrm;
        prob.rhs(static_cast<Eigen::Index>(j)) = rhs[j] / nrm;
    }

    // Phase 1: minimize the uniform slack shift u with a trace cap.
    const double cap = 1e6 * (1.0 + static_cast<double>(k_users));
    RVector x = identity_start(prob, 1.0);
    {
        Barrier ph1(prob, true, cap);
        RVector z(prob.vars() + 1);
        z.head(prob.vars()) = x;
        double worst = 0.0;
        for (int j = 0; j < prob.constraints(); ++j) {
            const double base = prob.coeff.row(j).dot(x) - prob.rhs(j);
            worst = std::min(worst, base);
        }
        z(prob.vars()) = -worst + 1.0;

        const double nu = static_cast<double>(k_users * prob.dim + prob.constraints() + 1);
        double t = 1.0;
        bool feasible = false;
        for (int outer = 0; outer < 64; ++outer) {
            ph1.center(z, t, opts.max_newton_steps);
            if (z(prob.vars()) < -1e-7) {
                feasible = true;
                break;
            }
            if (nu / t < 1e-12) break;
            t *= opts.barrier_increase;
        }
        if (!feasible) {
            // Name the tightest constraint at the phase-1 optimum.
            int worst_j = 0;
            double worst_s = std::numeric_limits<double>::infinity();
            for (int j = 0; j < prob.constraints(); ++j) {
                const double s = prob.coeff.row(j).dot(z.head(prob.vars())) - prob.rhs(j);
                if (s < worst_s) {
                    worst_s = s;
                    worst_j = j;
                }
            }
            sol.status = SdpStatus::kInfeasible;
            sol.infeasible_constraint = prob.names[static_cast<size_t>(worst_j)];
            return sol;
        }
        x = z.head(prob.vars());
    }

    // Phase 2: follow the central path of the power objective.
    {
        Barrier ph2(prob, false, 0.0);
        const double nu = static_cast<double>(k_users * prob.dim + prob.constraints());
        double t = 1.0;
        for (int outer = 0; outer < 64; ++outer) {
            ph2.center(x, t, opts.max_newton_steps);
            if (nu / t <= opts.gap_tolerance * std::max(1.0, prob.obj.dot(x))) break;
            t *= opts.barrier_increase;
        }
    }

    // Lift and report.
    sol.status = SdpStatus::kOptimal;
    sol.relaxed_power = 0.0;
    std::vector<CMatrix> reduced_blocks(static_cast<size_t>(k_users));
    for (int k = 0; k < k_users; ++k) {
        CMatrix f = assemble(prob.basis, x.segment(static_cast<Eigen::Index>(k) * nb, nb)) * scale;
        f = 0.5 * (f + f.adjoint());
        reduced_blocks[static_cast<size_t>(k)] = f;
        sol.blocks[static_cast<size_t>(k)] = v * f * v.adjoint();
        sol.relaxed_power += std::real(f.trace());
    }

    // Rank-1 recovery: principal components, then Gaussian randomization.
    std::vector<std::vector<CVector>> candidate_sets;
    std::vector<CVector> principal(static_cast<size_t>(k_users));
    std::vector<CMatrix> sqrt_blocks(static_cast<size_t>(k_users));
    for (int k = 0; k < k_users; ++k) {
        const EigResult eig = hermitian_eig(reduced_blocks[static_cast<size_t>(k)]);
        const double l1 = std::max(eig.values(0), 0.0);
        sol.rank_ratios[static_cast<size_t>(k)] =
            l1 > 0.0 && eig.values.size() > 1 ? std::max(eig.values(1), 0.0) / l1 : 0.0;
        principal[static_cast<size_t>(k)] = v * eig.vectors.col(0);
        CMatrix root = CMatrix::Zero(d, d);
        for (Eigen::Index i = 0; i < eig.values.size(); ++i)
            if (eig.values(i) > 0.0)
                root += std::sqrt(eig.values(i)) * eig.vectors.col(i) * eig.vectors.col(i).adjoint();
        sqrt_blocks[static_cast<size_t>(k)] = root;
    }
    candidate_sets.push_back(principal);

    const bool all_rank1 = std::all_of(sol.rank_ratios.begin(), sol.rank_ratios.end(),
                                       [&](double r) { return r < opts.rank1_ratio; });
    if (!all_rank1) {
        for (int trial = 0; trial < opts.randomization_trials; ++trial) {
            std::vector<CVector> dirs(static_cast<size_t>(k_users));
            for (int k = 0; k < k_users; ++k) {
                CVector g(d);
                for (Eigen::Index i = 0; i < d; ++i) g(i) = rng.cnormal(std::sqrt(0.5));
                CVector cand = v * (sqrt_blocks[static_cast<size_t>(k)] * g);
                const double nrm = cand.norm();
                if (nrm <= 0.0) {
                    cand = principal[static_cast<size_t>(k)];
                } else {
                    cand /= nrm;
                }
                dirs[static_cast<size_t>(k)] = cand;
            }
            candidate_sets.push_back(std::move(dirs));
        }
    }

    double best_power = std::numeric_limits<double>::infinity();
    std::vector<CVector> best_dirs;
    std::vector<double> best_powers;
    for (auto& dirs : candidate_sets) {
        for (auto& u : dirs) {
            const double nrm = u.norm();
            if (nrm > 0.0) u /= nrm;
        }
        const Recovery rec = rescale_directions(dirs, design, a_target, qos);
        if (rec.ok && rec.total < best_power) {
            best_power = rec.total;
            best_dirs = dirs;
            best_powers = rec.powers;
        }
    }

    if (std::isfinite(best_power)) {
        CMatrix f(nt, k_users);
        for (int k = 0; k < k_users; ++k)
            f.col(k) = std::sqrt(best_powers[static_cast<size_t>(k)]) * best_dirs[static_cast<size_t>(k)];
        sol.recovered = Precoder{std::move(f), best_power};
        sol.recovered_power = best_power;
    }
    return sol;
}

}  // namespace nfisac
