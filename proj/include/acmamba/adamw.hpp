#pragma once

#include <cmath>

#include "acmamba/errors.hpp"
#include "acmamba/types.hpp"

namespace acmamba {

// Decoupled-weight-decay Adam over a flat parameter vector.
template <typename S>
struct AdamWState {
    S lr = S(5e-4);
    S beta1 = S(0.9);
    S beta2 = S(0.999);
    S eps = S(1e-8);
    S weight_decay = S(0.01);

    VecX<S> m;
    VecX<S> v;
    long step = 0;

    explicit AdamWState(Index n_params)
        : m(VecX<S>::Zero(n_params)), v(VecX<S>::Zero(n_params)) {}
};

template <typename S>
void adamwStep(VecX<S>& params, const VecX<S>& grad, AdamWState<S>& st) {
    if (params.size() != grad.size() || params.size() != st.m.size())
        throw DimMismatchError("adamwStep: parameter/gradient/state sizes differ");
    st.step += 1;
    st.m = st.beta1 * st.m + (S(1) - st.beta1) * grad;
    st.v = (st.beta2 * st.v.array() + (S(1) - st.beta2) * grad.array().square()).matrix();
    const S bc1 = S(1) - std::pow(st.beta1, S(st.step));
    const S bc2 = S(1) - std::pow(st.beta2, S(st.step));
    params.array() -= st.lr * ((st.m.array() / bc1) /
                                   ((st.v.array() / bc2).sqrt() + st.eps) +
                               st.weight_decay * params.array());
}

} // namespace acmamba
