#pragma once

#include <string>
#include <vector>

#include "acmamba/rng.hpp"
#include "acmamba/rsal.hpp"

namespace acmamba {

enum class EncoderPath { Original, Masked };

// One-layer autoencoder: two encoders of identical shape (E for the raw
// sequence, Ê for the masked one) and a decoder shared by both paths.
template <typename S>
struct RsalAutoencoder {
    RsalBlock<S> encoder;        // C -> D -> D
    RsalBlock<S> masked_encoder; // C -> D -> D
    RsalBlock<S> decoder;        // D -> D -> C
    bool initialized = false;

    Index inDim() const { return encoder.inDim(); }
    Index hiddenDim() const { return encoder.outDim(); }
    Index stateDim() const { return encoder.ssm_fwd.states(); }

    static RsalAutoencoder zerosLike(const RsalAutoencoder& m) {
        RsalAutoencoder g;
        g.encoder = RsalBlock<S>::zerosLike(m.encoder);
        g.masked_encoder = RsalBlock<S>::zerosLike(m.masked_encoder);
        g.decoder = RsalBlock<S>::zerosLike(m.decoder);
        return g;
    }
};

template <typename S>
struct AutoencoderTape {
    RsalTape<S> enc;
    RsalTape<S> dec;
    EncoderPath path = EncoderPath::Original;
    bool valid = false;
};

template <typename S>
MatX<S> autoencoderForward(const RsalAutoencoder<S>& model, const MatX<S>& seq,
                           EncoderPath path, AutoencoderTape<S>* tape = nullptr) {
    const RsalBlock<S>& enc =
        path == EncoderPath::Original ? model.encoder : model.masked_encoder;
    RsalTape<S>*et = nullptr, *dt = nullptr;
    if (tape) {
        et = &tape->enc;
        dt = &tape->dec;
        tape->path = path;
    }
    const MatX<S> hidden = rsalForward(enc, seq, et);
    MatX<S> recon = rsalForward(model.decoder, hidden, dt);
    if (tape) tape->valid = true;
    return recon;
}

// Backpropagates d_recon through decoder and the encoder the tape recorded.
// Off-path encoder gradients stay exactly zero.
template <typename S>
void autoencoderBackward(const RsalAutoencoder<S>& model,
                         const AutoencoderTape<S>& tape, const MatX<S>& d_recon,
                         RsalAutoencoder<S>& grad) {
    if (!tape.valid)
        throw NoTapeError("autoencoderBackward called without a forward tape");
    MatX<S> d_hidden = MatX<S>::Zero(tape.dec.input.rows(), tape.dec.input.cols());
    rsalBackward(model.decoder, tape.dec, d_recon, grad.decoder, d_hidden);
    RsalBlock<S>& enc_grad = tape.path == EncoderPath::Original
                                 ? grad.encoder
                                 : grad.masked_encoder;
    const RsalBlock<S>& enc = tape.path == EncoderPath::Original
                                  ? model.encoder
                                  : model.masked_encoder;
    MatX<S> d_in = MatX<S>::Zero(tape.enc.input.rows(), tape.enc.input.cols());
    rsalBackward(enc, tape.enc, d_hidden, enc_grad, d_in);
}

// --- canonical parameter ordering -----------------------------------------
//
// Visitation order is fixed (encoder, masked_encoder, decoder; within a block
// the data path order) so that flat vectors, checkpoints, and optimizer state
// all agree. Tensors flatten column-major (Eigen storage order).

template <typename S, typename Fn>
void forEachTensor(SsmParams<S>& p, const std::string& prefix, Fn&& fn) {
    fn(prefix + ".a", p.a);
    fn(prefix + ".w_b", p.w_b);
    fn(prefix + ".w_c", p.w_c);
    fn(prefix + ".w_delta", p.w_delta);
    fn(prefix + ".b_delta", p.b_delta);
}

template <typename S, typename Fn>
void forEachTensor(RsalBlock<S>& b, const std::string& prefix, Fn&& fn) {
    fn(prefix + ".w_in_x", b.w_in_x);
    fn(prefix + ".w_in_z", b.w_in_z);
    fn(prefix + ".conv_k", b.conv_k);
    forEachTensor(b.ssm_fwd, prefix + ".ssm_fwd", fn);
    forEachTensor(b.ssm_bwd, prefix + ".ssm_bwd", fn);
    fn(prefix + ".w_out", b.w_out);
    fn(prefix + ".b_out", b.b_out);
}

template <typename S, typename Fn>
void forEachTensor(RsalAutoencoder<S>& m, Fn&& fn) {
    forEachTensor(m.encoder, "encoder", fn);
    forEachTensor(m.masked_encoder, "masked_encoder", fn);
    forEachTensor(m.decoder, "decoder", fn);
}

struct ParamEntry {
    std::string name;
    Index rows = 0;
    Index cols = 0;
    Index offset = 0;
    Index size() const { return rows * cols; }
};

template <typename S>
std::vector<ParamEntry> paramLayout(const RsalAutoencoder<S>& model) {
    std::vector<ParamEntry> layout;
    Index offset = 0;
    auto& m = const_cast<RsalAutoencoder<S>&>(model);
    forEachTensor(m, [&](const std::string& name, auto& tensor) {
        layout.push_back({name, tensor.rows(), tensor.cols(), offset});
        offset += tensor.size();
    });
    return layout;
}

template <typename S>
Index paramCount(const RsalAutoencoder<S>& model) {
    Index total = 0;
    auto& m = const_cast<RsalAutoencoder<S>&>(model);
    forEachTensor(m, [&](const std::string&, auto& t) { total += t.size(); });
    return total;
}

template <typename S>
VecX<S> flattenTensors(const RsalAutoencoder<S>& model) {
    VecX<S> flat(paramCount(model));
    Index offset = 0;
    auto& m = const_cast<RsalAutoencoder<S>&>(model);
    forEachTensor(m, [&](const std::string&, auto& t) {
        flat.segment(offset, t.size()) =
            Eigen::Map<const VecX<S>>(t.data(), t.size());
        offset += t.size();
    });
    return flat;
}

template <typename S>
void assignTensors(RsalAutoencoder<S>& model, const VecX<S>& flat) {
    if (flat.size() != paramCount(model))
        throw DimMismatchError("flat vector length != model parameter count");
    Index offset = 0;
    forEachTensor(model, [&](const std::string&, auto& t) {
        Eigen::Map<VecX<S>>(t.data(), t.size()) = flat.segment(offset, t.size());
        offset += t.size();
    });
}

// --- initialization --------------------------------------------------------

template <typename S>
void initSsm(SsmParams<S>& p, Index channels, Index states, Rng& rng) {
    // S4D-real style state matrix: row-constant -(n+1), strictly negative.
    p.a.resize(channels, states);
    for (Index d = 0; d < channels; ++d)
        for (Index n = 0; n < states; ++n) p.a(d, n) = S(-(double(n) + 1.0));

    const double wscale = 1.0 / std::sqrt(static_cast<double>(channels));
    auto fill = [&](MatX<S>& m, Index r, Index c, double s) {
        m.resize(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j) m(i, j) = S(rng.uniform(-s, s));
    };
    fill(p.w_b, states, channels, wscale);
    fill(p.w_c, states, channels, wscale);
    fill(p.w_delta, channels, channels, wscale);

    // Softplus bias chosen so initial step sizes land log-uniformly in
    // [1e-3, 1e-1], the usual selective-SSM range.
    p.b_delta.resize(channels);
    for (Index d = 0; d < channels; ++d) {
        const double dt = std::exp(rng.uniform(std::log(1e-3), std::log(1e-1)));
        p.b_delta(d) = S(std::log(std::expm1(dt)));
    }
}

template <typename S>
void initBlock(RsalBlock<S>& b, Index in_dim, Index inner, Index out_dim,
               Index states, Rng& rng) {
    auto fill = [&](MatX<S>& m, Index r, Index c, double s) {
        m.resize(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j) m(i, j) = S(rng.uniform(-s, s));
    };
    fill(b.w_in_x, inner, in_dim, 1.0 / std::sqrt(static_cast<double>(in_dim)));
    fill(b.w_in_z, inner, in_dim, 1.0 / std::sqrt(static_cast<double>(in_dim)));
    fill(b.conv_k, inner, 3, 1.0 / std::sqrt(3.0));
    initSsm(b.ssm_fwd, inner, states, rng);
    initSsm(b.ssm_bwd, inner, states, rng);
    fill(b.w_out, out_dim, inner, 1.0 / std::sqrt(static_cast<double>(inner)));
    b.b_out = VecX<S>::Zero(out_dim);
}

template <typename S>
RsalAutoencoder<S> makeAutoencoder(Index in_dim, Index hidden, Index states,
                                   std::uint64_t seed) {
    Rng rng(seed);
    RsalAutoencoder<S> model;
    initBlock(model.encoder, in_dim, hidden, hidden, states, rng);
    initBlock(model.masked_encoder, in_dim, hidden, hidden, states, rng);
    initBlock(model.decoder, hidden, hidden, in_dim, states, rng);
    model.initialized = true;
    return model;
}

} // namespace acmamba
