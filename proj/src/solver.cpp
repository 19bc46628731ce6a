#include "decum/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <utility>

#include "decum/errors.hpp"

namespace decum {

void SolveOptions::validate() const {
    if (n < 16 || n % 2 != 0)
        throw ConfigError("solver grid must be even and at least 16 nodes");
    if (!(half_span > 0.0))
        throw ConfigError("solver half_span must be positive");
    if (!std::isfinite(x_center))
        throw ConfigError("solver x_center must be finite");
    if (kappa < 0.0) throw ConfigError("kappa must be non-negative");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("alpha must lie strictly between 0 and 1");
    if (n_controls != 0 && n_controls < 2)
        throw ConfigError("n_controls must be at least 2");
    if (!(w_star_lo < w_star_hi))
        throw ConfigError("threshold scan interval is empty");
    if (scan_points < 3) throw ConfigError("scan_points must be at least 3");
    if (!(w_star_tol > 0.0)) throw ConfigError("w_star_tol must be positive");
    if (!(w_star_window > 0.0))
        throw ConfigError("w_star_window must be positive");
}

namespace {

SolveOptions resolved(SolveOptions o) {
    o.validate();
    if (o.n_controls == 0) o.n_controls = o.n + 1;
    return o;
}

constexpr double kTieRel = 1e-10;

}  // namespace

BackwardSolver::BackwardSolver(const WealthDynamics& dyn,
                               const WithdrawalRule& rule,
                               const SolveOptions& opt)
    : dyn_(dyn), rule_(rule), opt_(resolved(opt)),
      corr_(2 * opt_.n, 2 * opt_.n) {
    dyn_.market.validate();
    if (dyn_.n_dates < 1) throw ConfigError("need at least one rebalance date");
    if (!(dyn_.dt > 0.0)) throw ConfigError("dt must be positive");
    if (rule_.proportional) {
        const std::size_t need =
            std::size_t(dyn_.n_dates) + (dyn_.final_withdrawal ? 1 : 0);
        if (rule_.A.size() < need)
            throw ConfigError("withdrawal schedule shorter than the horizon");
    }

    n_ = opt_.n;
    h_ = 2.0 * opt_.half_span / double(n_);
    x_min_ = opt_.x_center - opt_.half_span;

    node_w_.resize(std::size_t(n_));
    for (int j = 0; j < n_; ++j)
        node_w_[std::size_t(j)] = std::exp(x_min_ + h_ * double(j));
    w_bot_ = node_w_.front();
    w_top_ = node_w_.back();

    eu_.resize(std::size_t(2 * n_));
    for (int i = 0; i < 2 * n_; ++i)
        eu_[std::size_t(i)] = std::exp(x_min_ + h_ * double(i - n_ / 2));

    s_over_h_.resize(std::size_t(2 * n_));
    for (int d = 0; d < 2 * n_; ++d)
        s_over_h_[std::size_t(d)] = std::log1p(std::exp(-h_ * double(d))) / h_;

    // control grid and the lattice offsets its log splits induce
    const int np = opt_.n_controls;
    ln_p_.assign(std::size_t(np), 0.0);
    ln_1mp_.assign(std::size_t(np), 0.0);
    for (int k = 1; k + 1 < np; ++k) {
        const double p = double(k) / double(np - 1);
        ln_p_[std::size_t(k)] = std::log(p) / h_;
        ln_1mp_[std::size_t(k)] = std::log1p(-p) / h_;
    }

    const ReturnGrid rk{-opt_.half_span, h_, n_};
    if (opt_.spectral_kernels) {
        ker_s_ = spectral_density_1d(dyn_.market, Leg::Stock, dyn_.dt, rk);
        ker_b_ = spectral_density_1d(dyn_.market, Leg::Bond, dyn_.dt, rk);
        ker_debt_ = spectral_density_1d(dyn_.market, Leg::Bond, dyn_.dt, rk,
                                        dyn_.market.mu_c_b * dyn_.dt);
        ker_2d_ = spectral_density_2d(dyn_.market, dyn_.dt, rk, rk);
    } else {
        ker_s_ = density_1d(dyn_.market, Leg::Stock, dyn_.dt, rk);
        ker_b_ = density_1d(dyn_.market, Leg::Bond, dyn_.dt, rk);
        ker_debt_ = density_1d(dyn_.market, Leg::Bond, dyn_.dt, rk,
                               dyn_.market.mu_c_b * dyn_.dt);
        ker_2d_ = density_2d(dyn_.market, dyn_.dt, rk, rk);
    }
    corr_.set_kernel(ker_2d_, n_, n_);

    // mu is the uncompensated arithmetic drift, so the one-period gross mean
    // is exactly e^{mu dt} per leg
    m_s_ = std::exp(dyn_.market.mu_s * dyn_.dt);
    m_b_ = std::exp(dyn_.market.mu_b * dyn_.dt);
    m_debt_ = std::exp((dyn_.market.mu_b + dyn_.market.mu_c_b) * dyn_.dt);
    mix_m_.resize(std::size_t(np));
    for (int k = 0; k < np; ++k) {
        const double p = double(k) / double(np - 1);
        mix_m_[std::size_t(k)] = p * m_s_ + (1.0 - p) * m_b_;
    }

    const std::size_t ns = std::size_t(n_);
    vp_.resize(ns); vn_.resize(ns); vp_next_.resize(ns); vn_next_.resize(ns);
    ap_.resize(ns); an_.resize(ns); ap_next_.resize(ns); an_next_.resize(ns);
    bp_.resize(ns); bn_.resize(ns); bp_next_.resize(ns); bn_next_.resize(ns);
    field_.resize(std::size_t(2 * n_) * std::size_t(2 * n_));
    rp_.resize(ns);
    rn_.resize(ns);
    f1pos_.resize(std::size_t(2 * n_ - 1));
    f1neg_.resize(std::size_t(2 * n_ - 1));
}

double BackwardSolver::eval_collapsed(const std::vector<double>& pos,
                                      const std::vector<double>& neg,
                                      double w) const {
    const std::size_t n = std::size_t(n_);
    const double gap = w_top_ - node_w_[n - 2];
    if (w >= w_bot_) {
        if (w >= w_top_)
            return pos[n - 1] + (w - w_top_) * (pos[n - 1] - pos[n - 2]) / gap;
        const double xi = (std::log(w) - x_min_) / h_;
        int k = int(xi);
        if (k > n_ - 2) k = n_ - 2;
        const double f = xi - double(k);
        return pos[std::size_t(k)] +
               f * (pos[std::size_t(k) + 1] - pos[std::size_t(k)]);
    }
    if (w <= -w_bot_) {
        if (w <= -w_top_)
            return neg[n - 1] + (w + w_top_) * (neg[n - 2] - neg[n - 1]) / gap;
        const double xi = (std::log(-w) - x_min_) / h_;
        int k = int(xi);
        if (k > n_ - 2) k = n_ - 2;
        const double f = xi - double(k);
        return neg[std::size_t(k)] +
               f * (neg[std::size_t(k) + 1] - neg[std::size_t(k)]);
    }
    return neg[0] + (w + w_bot_) / (2.0 * w_bot_) * (pos[0] - neg[0]);
}

// Far from the grid center the collapsed functions are linear in wealth: the
// debt side at slope kappa / alpha and the right side at the terminal tilt,
// both compounding each period. The clamped coarse kernels move a bounded
// field accurately but overstate the gross mean of a linear tail badly enough
// to blow the recursion up, so every correlation channel splits off the
// fitted asymptote, pushes it through the leg's exact gross mean, and
// correlates only the bounded remainder.
BackwardSolver::TailFit BackwardSolver::fit_tails(
    const std::vector<double>& pos, const std::vector<double>& neg) const {
    const std::size_t n = std::size_t(n_);
    const double gap = w_top_ - node_w_[n - 2];
    TailFit t;
    t.sp = (pos[n - 1] - pos[n - 2]) / gap;
    t.ap = pos[n - 1] - t.sp * w_top_;
    t.sn = (neg[n - 2] - neg[n - 1]) / gap;
    t.an = neg[n - 1] + t.sn * w_top_;
    return t;
}

double BackwardSolver::eval_residual(const std::vector<double>& pos,
                                     const std::vector<double>& neg, double w,
                                     double la, double ls) const {
    // the asymptote and the grid extrapolation share the same two nodes, so
    // past the edge the remainder is zero by construction
    if (w >= w_top_ || w <= -w_top_) return 0.0;
    return eval_collapsed(pos, neg, w) - (la + ls * w);
}

namespace {

// linear in the lattice coordinate inside the grid, flat below, linear in
// wealth above the last node (the fields grow at most linearly out there)
inline double look1(const std::vector<double>& g, int n, double xi, double wq,
                    double w_top, double gap) {
    if (xi <= 0.0) return g[0];
    const std::size_t un = std::size_t(n);
    if (xi >= double(n - 1))
        return g[un - 1] + (wq - w_top) * (g[un - 1] - g[un - 2]) / gap;
    const int k = int(xi);
    const double f = xi - double(k);
    return g[std::size_t(k)] + f * (g[std::size_t(k) + 1] - g[std::size_t(k)]);
}

inline double bilinear(const double* s, int stride, int n, double xi,
                       double eta) {
    if (xi < 0.0) xi = 0.0;
    if (xi > double(n - 1)) xi = double(n - 1);
    if (eta < 0.0) eta = 0.0;
    if (eta > double(n - 1)) eta = double(n - 1);
    int kx = int(xi);
    if (kx > n - 2) kx = n - 2;
    int ky = int(eta);
    if (ky > n - 2) ky = n - 2;
    const double fx = xi - double(kx);
    const double fy = eta - double(ky);
    const double* row = s + std::size_t(kx) * std::size_t(stride) +
                        std::size_t(ky);
    const double* row2 = row + std::size_t(stride);
    const double top = row[0] + fy * (row[1] - row[0]);
    const double bot = row2[0] + fy * (row2[1] - row2[0]);
    return top + fx * (bot - top);
}

void copy_core(const std::vector<double>& field, int n,
               std::vector<double>& core) {
    core.resize(std::size_t(n) * std::size_t(n));
    for (int r = 0; r < n; ++r)
        std::memcpy(core.data() + std::size_t(r) * std::size_t(n),
                    field.data() + std::size_t(r) * std::size_t(2 * n),
                    std::size_t(n) * sizeof(double));
}

}  // namespace

void BackwardSolver::terminal_condition(double w_star, bool with_sidecars) {
    const int M = dyn_.n_dates;
    for (int side = 0; side < 2; ++side) {
        auto& v = side == 0 ? vp_ : vn_;
        auto& a = side == 0 ? ap_ : an_;
        auto& b = side == 0 ? bp_ : bn_;
        for (int j = 0; j < n_; ++j) {
            const double w = (side == 0 ? 1.0 : -1.0) * node_w_[std::size_t(j)];
            const double q = dyn_.final_withdrawal ? rule_.q_at(M, w) : 0.0;
            const double wt = w - q;
            const double short_t = std::min(wt - w_star, 0.0);
            v[std::size_t(j)] = q +
                                opt_.kappa * (w_star + short_t / opt_.alpha) +
                                opt_.epsilon * wt;
            if (with_sidecars) {
                a[std::size_t(j)] = q;
                b[std::size_t(j)] = short_t;
            }
        }
    }
}

namespace {

// field[i][j] = value at wealth e^{u_i} + e^{u_j} on the extended lattice;
// the lattice coordinate of the sum is max(i,j) - n/2 + log1p(e^{-|i-j| h})/h,
// so the build needs no transcendentals inside the double loop
void build_field(std::vector<double>& field, const std::vector<double>& pos,
                 const std::vector<double>& neg,
                 const std::vector<double>& eu,
                 const std::vector<double>& s_over_h,
                 const std::vector<double>& node_w, int n, double w_bot,
                 double w_top) {
    const int n2 = 2 * n;
    const std::size_t un = std::size_t(n);
    const double v_lo = neg[0];
    const double dv_c = pos[0] - neg[0];
    const double inv2wb = 1.0 / (2.0 * w_bot);
    const double slope_top =
        (pos[un - 1] - pos[un - 2]) / (w_top - node_w[un - 2]);
    const double v_top = pos[un - 1];
    const double* ps = pos.data();
    const double* se = s_over_h.data();
    const double* ue = eu.data();
    const double top_xi = double(n - 1);
    for (int i = 0; i < n2; ++i) {
        double* row = field.data() + std::size_t(i) * std::size_t(n2);
        const double eui = ue[i];
        for (int j = 0; j < n2; ++j) {
            const int d = i > j ? i - j : j - i;
            const int mx = i > j ? i : j;
            const double xi = double(mx - n / 2) + se[d];
            if (xi >= top_xi) {
                row[j] = v_top + (eui + ue[j] - w_top) * slope_top;
            } else if (xi <= 0.0) {
                row[j] = v_lo + (eui + ue[j] + w_bot) * inv2wb * dv_c;
            } else {
                const int k = int(xi);
                const double f = xi - double(k);
                row[j] = ps[k] + f * (ps[k + 1] - ps[k]);
            }
        }
    }
}

}  // namespace

void BackwardSolver::step_back(int date, bool with_sidecars) {
    const int ne = 2 * n_ - 1;
    const TailFit tv = fit_tails(vp_, vn_);
    TailFit ta{}, tb{};
    for (int i = 0; i < ne; ++i) {
        const double u = eu_[std::size_t(i)];
        f1pos_[std::size_t(i)] = eval_residual(vp_, vn_, u, tv.ap, tv.sp);
        f1neg_[std::size_t(i)] = eval_residual(vp_, vn_, -u, tv.an, tv.sn);
    }
    g1s_ = cross_correlate_1d(f1pos_, ker_s_.w, n_);
    g1b_ = cross_correlate_1d(f1pos_, ker_b_.w, n_);
    g1neg_ = cross_correlate_1d(f1neg_, ker_debt_.w, n_);
    if (with_sidecars) {
        ta = fit_tails(ap_, an_);
        tb = fit_tails(bp_, bn_);
        for (int i = 0; i < ne; ++i) {
            const double u = eu_[std::size_t(i)];
            f1pos_[std::size_t(i)] = eval_residual(ap_, an_, u, ta.ap, ta.sp);
            f1neg_[std::size_t(i)] = eval_residual(ap_, an_, -u, ta.an, ta.sn);
        }
        g1s_a_ = cross_correlate_1d(f1pos_, ker_s_.w, n_);
        g1b_a_ = cross_correlate_1d(f1pos_, ker_b_.w, n_);
        g1neg_a_ = cross_correlate_1d(f1neg_, ker_debt_.w, n_);
        for (int i = 0; i < ne; ++i) {
            const double u = eu_[std::size_t(i)];
            f1pos_[std::size_t(i)] = eval_residual(bp_, bn_, u, tb.ap, tb.sp);
            f1neg_[std::size_t(i)] = eval_residual(bp_, bn_, -u, tb.an, tb.sn);
        }
        g1s_b_ = cross_correlate_1d(f1pos_, ker_s_.w, n_);
        g1b_b_ = cross_correlate_1d(f1pos_, ker_b_.w, n_);
        g1neg_b_ = cross_correlate_1d(f1neg_, ker_debt_.w, n_);
    }

    // the 2-D field only ever sees positive post-rebalance wealth, so its
    // residual is taken against the right-tail line of each channel
    auto strip_right = [this](const std::vector<double>& pos,
                              const std::vector<double>& neg,
                              const TailFit& t) {
        for (int j = 0; j < n_; ++j) {
            const double lw = t.sp * node_w_[std::size_t(j)];
            rp_[std::size_t(j)] = pos[std::size_t(j)] - (t.ap + lw);
            rn_[std::size_t(j)] = neg[std::size_t(j)] - (t.ap - lw);
        }
    };
    strip_right(vp_, vn_, tv);
    build_field(field_, rp_, rn_, eu_, s_over_h_, node_w_, n_, w_bot_, w_top_);
    corr_.apply(field_, field_);
    const double* surf_v = field_.data();
    int stride = 2 * n_;
    if (with_sidecars) {
        copy_core(field_, n_, core_v_);
        strip_right(ap_, an_, ta);
        build_field(field_, rp_, rn_, eu_, s_over_h_, node_w_, n_, w_bot_,
                    w_top_);
        corr_.apply(field_, field_);
        copy_core(field_, n_, core_a_);
        strip_right(bp_, bn_, tb);
        build_field(field_, rp_, rn_, eu_, s_over_h_, node_w_, n_, w_bot_,
                    w_top_);
        corr_.apply(field_, field_);
        copy_core(field_, n_, core_b_);
        surf_v = core_v_.data();
        stride = n_;
    }

    ControlSlice* slice = nullptr;
    if (with_sidecars) {
        slice = &table_.slices[std::size_t(date)];
        slice->w.clear();
        slice->p.clear();
        slice->w.reserve(std::size_t(n_));
        slice->p.reserve(std::size_t(n_));
    }

    const int np = opt_.n_controls;
    const double gap = w_top_ - node_w_[std::size_t(n_) - 2];
    for (int side = 0; side < 2; ++side) {
        auto& v_out = side == 0 ? vp_next_ : vn_next_;
        auto& a_out = side == 0 ? ap_next_ : an_next_;
        auto& b_out = side == 0 ? bp_next_ : bn_next_;
        for (int j = 0; j < n_; ++j) {
            const double w = (side == 0 ? 1.0 : -1.0) * node_w_[std::size_t(j)];
            const double q = rule_.q_at(date, w);
            const double wp = w - q;
            double cont, cont_a = 0.0, cont_b = 0.0;
            double p_star = 0.0;
            if (wp < 0.0) {
                const double aw = -wp;
                const double xi = (std::log(aw) - x_min_) / h_;
                const double mw = wp * m_debt_;
                cont = look1(g1neg_, n_, xi, aw, w_top_, gap) + tv.an +
                       tv.sn * mw;
                if (with_sidecars) {
                    cont_a = look1(g1neg_a_, n_, xi, aw, w_top_, gap) + ta.an +
                             ta.sn * mw;
                    cont_b = look1(g1neg_b_, n_, xi, aw, w_top_, gap) + tb.an +
                             tb.sn * mw;
                }
            } else if (wp == 0.0) {
                cont = eval_collapsed(vp_, vn_, 0.0);
                if (with_sidecars) {
                    cont_a = eval_collapsed(ap_, an_, 0.0);
                    cont_b = eval_collapsed(bp_, bn_, 0.0);
                }
            } else {
                const double xiw = (std::log(wp) - x_min_) / h_;
                const double spw = tv.sp * wp;
                double best = look1(g1b_, n_, xiw, wp, w_top_, gap) + tv.ap +
                              spw * mix_m_[0];
                int best_k = 0;
                for (int k = 1; k + 1 < np; ++k) {
                    const double v =
                        bilinear(surf_v, stride, n_, xiw + ln_p_[std::size_t(k)],
                                 xiw + ln_1mp_[std::size_t(k)]) +
                        tv.ap + spw * mix_m_[std::size_t(k)];
                    if (v > best + kTieRel * (std::fabs(best) + 1.0)) {
                        best = v;
                        best_k = k;
                    }
                }
                const double v1 = look1(g1s_, n_, xiw, wp, w_top_, gap) +
                                  tv.ap + spw * mix_m_[std::size_t(np) - 1];
                if (v1 > best + kTieRel * (std::fabs(best) + 1.0)) {
                    best = v1;
                    best_k = np - 1;
                }
                cont = best;
                p_star = double(best_k) / double(np - 1);
                if (with_sidecars) {
                    const double mk = wp * mix_m_[std::size_t(best_k)];
                    const double ma = ta.ap + ta.sp * mk;
                    const double mb = tb.ap + tb.sp * mk;
                    if (best_k == 0) {
                        cont_a = look1(g1b_a_, n_, xiw, wp, w_top_, gap) + ma;
                        cont_b = look1(g1b_b_, n_, xiw, wp, w_top_, gap) + mb;
                    } else if (best_k == np - 1) {
                        cont_a = look1(g1s_a_, n_, xiw, wp, w_top_, gap) + ma;
                        cont_b = look1(g1s_b_, n_, xiw, wp, w_top_, gap) + mb;
                    } else {
                        const double xx = xiw + ln_p_[std::size_t(best_k)];
                        const double yy = xiw + ln_1mp_[std::size_t(best_k)];
                        cont_a = bilinear(core_a_.data(), n_, n_, xx, yy) + ma;
                        cont_b = bilinear(core_b_.data(), n_, n_, xx, yy) + mb;
                    }
                }
                if (slice && side == 0 &&
                    (slice->w.empty() || wp > slice->w.back())) {
                    slice->w.push_back(wp);
                    slice->p.push_back(p_star);
                }
            }
            v_out[std::size_t(j)] = q + cont;
            if (with_sidecars) {
                a_out[std::size_t(j)] = q + cont_a;
                b_out[std::size_t(j)] = cont_b;
            }
        }
    }
    vp_.swap(vp_next_);
    vn_.swap(vn_next_);
    if (with_sidecars) {
        ap_.swap(ap_next_);
        an_.swap(an_next_);
        bp_.swap(bp_next_);
        bn_.swap(bn_next_);
    }
}

double BackwardSolver::value_at(double w_star) {
    terminal_condition(w_star, false);
    for (int date = dyn_.n_dates - 1; date >= 0; --date)
        step_back(date, false);
    const double v = eval_collapsed(vp_, vn_, dyn_.w0);
    if (!std::isfinite(v))
        throw NumericsError("backward solve produced a non-finite value");
    return v;
}

ThresholdSolve BackwardSolver::solve(double w_star, bool with_sidecars) {
    if (with_sidecars) {
        table_ = ControlTable{};
        table_.slices.assign(std::size_t(dyn_.n_dates), ControlSlice{});
        table_.w_star = w_star;
        table_.kappa = opt_.kappa;
        table_.alpha = opt_.alpha;
        table_.epsilon = opt_.epsilon;
        table_.w0 = dyn_.w0;
        table_.n_x = n_;
        table_.n_y = n_;
        table_.x_min = x_min_;
        table_.x_max = x_min_ + h_ * double(n_ - 1);
    }
    terminal_condition(w_star, with_sidecars);
    for (int date = dyn_.n_dates - 1; date >= 0; --date)
        step_back(date, with_sidecars);

    ThresholdSolve out;
    out.value = eval_collapsed(vp_, vn_, dyn_.w0);
    if (!std::isfinite(out.value))
        throw NumericsError("backward solve produced a non-finite value");
    if (with_sidecars) {
        out.ew_sum = eval_collapsed(ap_, an_, dyn_.w0);
        out.shortfall = eval_collapsed(bp_, bn_, dyn_.w0);
        out.table = std::move(table_);
    }
    out.nodes_w.reserve(std::size_t(2 * n_));
    out.nodes_v.reserve(std::size_t(2 * n_));
    for (int j = n_ - 1; j >= 0; --j) {
        out.nodes_w.push_back(-node_w_[std::size_t(j)]);
        out.nodes_v.push_back(vn_[std::size_t(j)]);
    }
    for (int j = 0; j < n_; ++j) {
        out.nodes_w.push_back(node_w_[std::size_t(j)]);
        out.nodes_v.push_back(vp_[std::size_t(j)]);
    }
    return out;
}

namespace {

std::pair<double, double> scan_bracket(BackwardSolver& bs,
                                       const SolveOptions& o) {
    const int m = o.scan_points;
    const double step = (o.w_star_hi - o.w_star_lo) / double(m - 1);
    double best = -std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < m; ++i) {
        const double v = bs.value_at(o.w_star_lo + step * double(i));
        if (v > best) {
            best = v;
            best_i = i;
        }
    }
    // zero is the natural floor of the threshold domain, not a bracketing
    // accident, so a peak on an exact-zero lower edge refines downhill from
    // the first interior point instead of failing
    if (best_i == 0 && o.w_star_lo == 0.0) return {0.0, step};
    if (best_i == 0 || best_i == m - 1)
        throw NumericsError(
            "threshold scan peaked at the bracket edge; widen "
            "w_star_lo/w_star_hi");
    return {o.w_star_lo + step * double(best_i - 1),
            o.w_star_lo + step * double(best_i + 1)};
}

double golden_max(BackwardSolver& bs, double a, double b, double tol) {
    const double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = bs.value_at(x1);
    double f2 = bs.value_at(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = bs.value_at(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = bs.value_at(x1);
        }
    }
    return f1 > f2 ? x1 : x2;
}

}  // namespace

SolveResult solve_optimal(const WealthDynamics& dyn, const WithdrawalRule& rule,
                          const SolveOptions& opt) {
    SolveOptions o = resolved(opt);
    double lo, hi;
    bool guard_edges = false;
    if (std::isfinite(o.w_star_hint)) {
        lo = o.w_star_hint - o.w_star_window;
        hi = o.w_star_hint + o.w_star_window;
        guard_edges = true;
    } else if (o.n > 512) {
        // bracket on a cheap grid first, refine on the requested one; the
        // automatic window stays inside the configured search domain
        SolveOptions co = o;
        co.n = 512;
        co.n_controls = 0;
        BackwardSolver coarse(dyn, rule, co);
        auto [clo, chi] = scan_bracket(coarse, co);
        const double ws = golden_max(coarse, clo, chi, o.w_star_tol);
        lo = std::max(ws - o.w_star_window, o.w_star_lo);
        hi = std::min(ws + o.w_star_window, o.w_star_hi);
        guard_edges = true;
    } else {
        lo = hi = 0.0;  // set by the scan below
    }

    BackwardSolver bs(dyn, rule, o);
    if (!guard_edges) {
        auto [slo, shi] = scan_bracket(bs, o);
        lo = slo;
        hi = shi;
    }
    double w_star = golden_max(bs, lo, hi, o.w_star_tol);
    // a threshold within tolerance of the exact-zero domain floor collapses
    // onto the floor; landing there is an optimum, not a mis-bracketing
    const bool at_floor =
        o.w_star_lo == 0.0 && lo == 0.0 && w_star <= o.w_star_tol;
    if (at_floor) w_star = 0.0;
    if (guard_edges && !at_floor &&
        (w_star <= lo + o.w_star_tol || w_star >= hi - o.w_star_tol))
        throw NumericsError(
            "threshold refinement ran into the bracket edge; widen "
            "w_star_window or drop the hint");

    ThresholdSolve aux = bs.solve(w_star, true);
    SolveResult r;
    r.table = std::move(aux.table);
    r.value = aux.value;
    r.w_star = w_star;
    r.es = w_star + aux.shortfall / o.alpha;
    const int draws = dyn.n_dates + (dyn.final_withdrawal ? 1 : 0);
    r.ew_per_date = aux.ew_sum / double(draws);
    return r;
}

}  // namespace decum
