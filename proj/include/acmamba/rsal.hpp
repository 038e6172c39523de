#pragma once

#include "acmamba/ssm.hpp"

namespace acmamba {

// Bidirectional selective-scan block: two input projections (scan branch x
// and gate branch z), depthwise width-3 convolution with SiLU, forward and
// backward SSM scans summed, SiLU(z) gating, output projection with bias.
template <typename S>
struct RsalBlock {
    MatX<S> w_in_x; // D x in
    MatX<S> w_in_z; // D x in
    MatX<S> conv_k; // D x 3
    SsmParams<S> ssm_fwd;
    SsmParams<S> ssm_bwd;
    MatX<S> w_out; // out x D
    VecX<S> b_out; // out

    Index inDim() const { return w_in_x.cols(); }
    Index innerDim() const { return w_in_x.rows(); }
    Index outDim() const { return w_out.rows(); }

    static RsalBlock zerosLike(const RsalBlock& b) {
        RsalBlock g;
        g.w_in_x = MatX<S>::Zero(b.w_in_x.rows(), b.w_in_x.cols());
        g.w_in_z = MatX<S>::Zero(b.w_in_z.rows(), b.w_in_z.cols());
        g.conv_k = MatX<S>::Zero(b.conv_k.rows(), b.conv_k.cols());
        g.ssm_fwd = SsmParams<S>::zerosLike(b.ssm_fwd);
        g.ssm_bwd = SsmParams<S>::zerosLike(b.ssm_bwd);
        g.w_out = MatX<S>::Zero(b.w_out.rows(), b.w_out.cols());
        g.b_out = VecX<S>::Zero(b.b_out.size());
        return g;
    }
};

// Depthwise same-padded width-3 convolution along the sequence axis.
template <typename S>
MatX<S> depthwiseConv3(const MatX<S>& x, const MatX<S>& k) {
    const Index t_len = x.rows(), d = x.cols();
    MatX<S> out(t_len, d);
    for (Index t = 0; t < t_len; ++t) {
        for (Index ch = 0; ch < d; ++ch) {
            S acc = k(ch, 1) * x(t, ch);
            if (t > 0) acc += k(ch, 0) * x(t - 1, ch);
            if (t + 1 < t_len) acc += k(ch, 2) * x(t + 1, ch);
            out(t, ch) = acc;
        }
    }
    return out;
}

template <typename S>
struct RsalTape {
    MatX<S> input; // T x in
    MatX<S> x, z;  // T x D
    MatX<S> xc;    // T x D, after conv
    MatX<S> xp;    // T x D, SiLU(xc)
    SsmScanTape<S> fwd_tape, bwd_tape;
    MatX<S> y;     // T x D, sum of both scans
    MatX<S> gated; // T x D, y ⊙ SiLU(z)
    bool valid = false;
};

template <typename S>
MatX<S> rsalForward(const RsalBlock<S>& blk, const MatX<S>& seq,
                    RsalTape<S>* tape = nullptr) {
    if (seq.rows() < 1) throw EmptySequenceError("rsalForward needs at least one step");
    if (seq.cols() != blk.inDim())
        throw DimMismatchError("sequence width != block input dim");

    const MatX<S> x = seq * blk.w_in_x.transpose();
    const MatX<S> z = seq * blk.w_in_z.transpose();
    const MatX<S> xc = depthwiseConv3(x, blk.conv_k);
    const MatX<S> xp = xc.unaryExpr([](S v) { return silu(v); });

    SsmScanTape<S>*ft = nullptr, *bt = nullptr;
    if (tape) {
        ft = &tape->fwd_tape;
        bt = &tape->bwd_tape;
    }
    const MatX<S> y = ssmScan(blk.ssm_fwd, xp, ScanDirection::Forward, ft) +
                      ssmScan(blk.ssm_bwd, xp, ScanDirection::Backward, bt);

    const MatX<S> gated =
        (y.array() * z.unaryExpr([](S v) { return silu(v); }).array()).matrix();
    MatX<S> out = gated * blk.w_out.transpose();
    out.rowwise() += blk.b_out.transpose();

    if (tape) {
        tape->input = seq;
        tape->x = x;
        tape->z = z;
        tape->xc = xc;
        tape->xp = xp;
        tape->y = y;
        tape->gated = gated;
        tape->valid = true;
    }
    return out;
}

template <typename S>
void rsalBackward(const RsalBlock<S>& blk, const RsalTape<S>& tape,
                  const MatX<S>& d_out, RsalBlock<S>& grad, MatX<S>& d_seq) {
    if (!tape.valid) throw NoTapeError("rsalBackward called without a forward tape");

    grad.w_out += d_out.transpose() * tape.gated;
    grad.b_out += d_out.colwise().sum().transpose();
    const MatX<S> d_gated = d_out * blk.w_out;

    const MatX<S> gate = tape.z.unaryExpr([](S v) { return silu(v); });
    const MatX<S> d_y = (d_gated.array() * gate.array()).matrix();
    const MatX<S> d_z = (d_gated.array() * tape.y.array() *
                         tape.z.unaryExpr([](S v) { return siluGrad(v); }).array())
                            .matrix();

    MatX<S> d_xp = MatX<S>::Zero(tape.xp.rows(), tape.xp.cols());
    ssmScanBackward(blk.ssm_fwd, tape.xp, tape.fwd_tape, d_y, grad.ssm_fwd, d_xp);
    ssmScanBackward(blk.ssm_bwd, tape.xp, tape.bwd_tape, d_y, grad.ssm_bwd, d_xp);

    const MatX<S> d_xc =
        (d_xp.array() * tape.xc.unaryExpr([](S v) { return siluGrad(v); }).array())
            .matrix();

    // Transpose of the depthwise conv, plus kernel gradients.
    const Index t_len = d_xc.rows(), d = d_xc.cols();
    MatX<S> d_x = MatX<S>::Zero(t_len, d);
    for (Index t = 0; t < t_len; ++t) {
        for (Index ch = 0; ch < d; ++ch) {
            const S g = d_xc(t, ch);
            grad.conv_k(ch, 1) += g * tape.x(t, ch);
            d_x(t, ch) += blk.conv_k(ch, 1) * g;
            if (t > 0) {
                grad.conv_k(ch, 0) += g * tape.x(t - 1, ch);
                d_x(t - 1, ch) += blk.conv_k(ch, 0) * g;
            }
            if (t + 1 < t_len) {
                grad.conv_k(ch, 2) += g * tape.x(t + 1, ch);
                d_x(t + 1, ch) += blk.conv_k(ch, 2) * g;
            }
        }
    }

    grad.w_in_x += d_x.transpose() * tape.input;
    grad.w_in_z += d_z.transpose() * tape.input;
    d_seq += d_x * blk.w_in_x + d_z * blk.w_in_z;
}

} // namespace acmamba
