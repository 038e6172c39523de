#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "acmamba/errors.hpp"
#include "acmamba/types.hpp"

namespace acmamba {

template <typename S>
S softplus(S x) {
    if (x > S(30)) return x;
    if (x < S(-30)) return std::exp(x);
    return std::log1p(std::exp(x));
}

template <typename S>
S sigmoid(S x) {
    if (x >= S(0)) return S(1) / (S(1) + std::exp(-x));
    const S e = std::exp(x);
    return e / (S(1) + e);
}

template <typename S>
S silu(S x) {
    return x * sigmoid(x);
}

template <typename S>
S siluGrad(S x) {
    const S s = sigmoid(x);
    return s * (S(1) + x * (S(1) - s));
}

// Zero-order hold: abar = exp(delta*a), bbar = (delta*a)^-1 (exp(delta*a)-1)
// * delta * b. Below kSmallDeltaA the first-order series bbar = delta*b is
// used (the closed form loses all precision there and the series is exact in
// the limit).
inline constexpr double kSmallDeltaA = 1e-6;

template <typename S>
std::pair<S, S> discretize(S a, S b, S delta) {
    if (!(delta > S(0))) throw NonPositiveDeltaError("discretize requires delta > 0");
    const S da = delta * a;
    const S abar = std::exp(da);
    const S bbar = std::abs(da) < S(kSmallDeltaA) ? delta * b : (abar - S(1)) / a * b;
    return {abar, bbar};
}

enum class ScanDirection { Forward, Backward };

// Selective SSM parameters for one scan direction. B_t, C_t and Delta_t are
// projections of the input vector; A is the per-channel diagonal state
// matrix, strictly negative for stability.
template <typename S>
struct SsmParams {
    MatX<S> a;       // channels x states
    MatX<S> w_b;     // states x channels
    MatX<S> w_c;     // states x channels
    MatX<S> w_delta; // channels x channels
    VecX<S> b_delta; // channels

    Index channels() const { return a.rows(); }
    Index states() const { return a.cols(); }

    static SsmParams zerosLike(const SsmParams& p) {
        SsmParams g;
        g.a = MatX<S>::Zero(p.a.rows(), p.a.cols());
        g.w_b = MatX<S>::Zero(p.w_b.rows(), p.w_b.cols());
        g.w_c = MatX<S>::Zero(p.w_c.rows(), p.w_c.cols());
        g.w_delta = MatX<S>::Zero(p.w_delta.rows(), p.w_delta.cols());
        g.b_delta = VecX<S>::Zero(p.b_delta.size());
        return g;
    }
};

// Cached activations from one scan, enough to run the exact reverse pass.
template <typename S>
struct SsmScanTape {
    MatX<S> b_t;                // T x N
    MatX<S> c_t;                // T x N
    MatX<S> pre;                // T x D, before softplus
    MatX<S> dlt;                // T x D, after softplus
    std::vector<MatX<S>> state; // h after each visited step, D x N, visit order
    ScanDirection dir = ScanDirection::Forward;
    bool valid = false;
};

// h_t = abar ⊙ h_{t-1} + bbar * x_{t,d};  y_{t,d} = <C_t, h_t> + x_{t,d}.
// The projections B_t = W_B u_t, C_t = W_C u_t, Delta_t = softplus(W_D u_t +
// b_D) are batched as matrix products; only the recurrence is sequential.
template <typename S>
MatX<S> ssmScan(const SsmParams<S>& p, const MatX<S>& seq, ScanDirection dir,
                SsmScanTape<S>* tape = nullptr) {
    const Index t_len = seq.rows(), d = p.channels(), n = p.states();
    if (t_len < 1) throw EmptySequenceError("ssmScan needs at least one step");
    if (seq.cols() != d) throw DimMismatchError("sequence width != SSM channels");

    const MatX<S> b_t = seq * p.w_b.transpose();
    const MatX<S> c_t = seq * p.w_c.transpose();
    MatX<S> pre = seq * p.w_delta.transpose();
    pre.rowwise() += p.b_delta.transpose();
    MatX<S> dlt = pre.unaryExpr([](S x) { return softplus(x); });

    if (tape) {
        tape->b_t = b_t;
        tape->c_t = c_t;
        tape->pre = pre;
        tape->dlt = dlt;
        tape->state.assign(static_cast<std::size_t>(t_len), MatX<S>());
        tape->dir = dir;
        tape->valid = true;
    }

    MatX<S> out(t_len, d);
    ArrXX<S> h = ArrXX<S>::Zero(d, n);
    const ArrXX<S> a = p.a.array();

    for (Index pos = 0; pos < t_len; ++pos) {
        const Index t = dir == ScanDirection::Forward ? pos : t_len - 1 - pos;
        const ArrX<S> dlt_t = dlt.row(t).transpose().array();
        const ArrX<S> x_t = seq.row(t).transpose().array();

        const ArrXX<S> da = a.colwise() * dlt_t;
        const ArrXX<S> abar = da.exp();
        const ArrXX<S> phi = (da.abs() < S(kSmallDeltaA))
                                 .select(dlt_t.replicate(1, n), (abar - S(1)) / a);
        const ArrXX<S> bbar =
            phi.rowwise() * b_t.row(t).array();

        h = abar * h + bbar.colwise() * x_t;
        out.row(t) =
            (h.matrix() * c_t.row(t).transpose() + seq.row(t).transpose()).transpose();
        if (tape) tape->state[static_cast<std::size_t>(pos)] = h.matrix();
    }
    return out;
}

// Exact reverse-mode pass of ssmScan. Gradients are accumulated into `grad`
// and `d_seq`; both must be pre-sized (zero or carrying other contributions).
template <typename S>
void ssmScanBackward(const SsmParams<S>& p, const MatX<S>& seq,
                     const SsmScanTape<S>& tape, const MatX<S>& d_out,
                     SsmParams<S>& grad, MatX<S>& d_seq) {
    if (!tape.valid) throw NoTapeError("ssmScanBackward called without a forward tape");
    const Index t_len = seq.rows(), d = p.channels(), n = p.states();

    MatX<S> d_b = MatX<S>::Zero(t_len, n);
    MatX<S> d_c = MatX<S>::Zero(t_len, n);
    MatX<S> d_dlt = MatX<S>::Zero(t_len, d);

    ArrXX<S> gh = ArrXX<S>::Zero(d, n);
    const ArrXX<S> a = p.a.array();

    for (Index pos = t_len - 1; pos >= 0; --pos) {
        const Index t =
            tape.dir == ScanDirection::Forward ? pos : t_len - 1 - pos;
        const ArrX<S> dlt_t = tape.dlt.row(t).transpose().array();
        const ArrX<S> x_t = seq.row(t).transpose().array();
        const ArrX<S> dy_t = d_out.row(t).transpose().array();

        const ArrXX<S> da = a.colwise() * dlt_t;
        const ArrXX<S> abar = da.exp();
        const ArrXX<S> small = (da.abs() < S(kSmallDeltaA)).template cast<S>();
        const ArrXX<S> phi =
            small * dlt_t.replicate(1, n) + (S(1) - small) * (abar - S(1)) / a;
        const ArrXX<S> bbar = phi.rowwise() * tape.b_t.row(t).array();

        const ArrXX<S> h_t = tape.state[static_cast<std::size_t>(pos)].array();
        const ArrXX<S> h_prev =
            pos > 0 ? ArrXX<S>(tape.state[static_cast<std::size_t>(pos - 1)].array())
                    : ArrXX<S>(ArrXX<S>::Zero(d, n));

        // y_{t,d} = sum_n C_{t,n} h_{t,d,n} + x_{t,d}
        d_c.row(t) += (h_t.colwise() * dy_t).colwise().sum().matrix();
        gh += (dy_t.matrix() * tape.c_t.row(t)).array();

        // h_t = abar ⊙ h_prev + bbar ⊙ x_t  (x broadcast over states)
        const ArrXX<S> dabar = gh * h_prev;
        const ArrXX<S> dbbar = gh.colwise() * x_t;
        d_seq.row(t) +=
            ((gh * bbar).rowwise().sum().matrix() + dy_t.matrix()).transpose();

        d_b.row(t) += (dbbar * phi).colwise().sum().matrix();
        const ArrXX<S> dphi = dbbar.rowwise() * tape.b_t.row(t).array();

        // abar = exp(delta*a); phi = (abar-1)/a, or delta on the series branch
        const ArrXX<S> dphi_ddlt = small + (S(1) - small) * abar;
        const ArrXX<S> dphi_da = (S(1) - small) *
                                 ((abar.colwise() * dlt_t) - phi) / a;
        d_dlt.row(t) += ((dabar * abar * a + dphi * dphi_ddlt).rowwise().sum())
                            .matrix()
                            .transpose();
        grad.a.array() += (dabar * abar).colwise() * dlt_t + dphi * dphi_da;

        gh *= abar;
    }

    const MatX<S> d_pre =
        (d_dlt.array() * tape.pre.unaryExpr([](S x) { return sigmoid(x); }).array())
            .matrix();

    grad.w_b += d_b.transpose() * seq;
    grad.w_c += d_c.transpose() * seq;
    grad.w_delta += d_pre.transpose() * seq;
    grad.b_delta += d_pre.colwise().sum().transpose();
    d_seq += d_b * p.w_b + d_c * p.w_c + d_pre * p.w_delta;
}

} // namespace acmamba
