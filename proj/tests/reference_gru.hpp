#pragma once

// Independent single-purpose recurrence evaluator used as a forward-pass
// oracle. Plain std::vector loops, no Eigen, no code shared with the
// production path beyond the published tensor layout (offsets are part of
// the model file contract). Inference only.

#include <cmath>
#include <vector>

#include "earlyguard/gru.hpp"

namespace refgru {

using Mat = std::vector<std::vector<double>>;  // [row][col]
using Vec = std::vector<double>;

inline Mat tensor_of(const earlyguard::GruNetwork& net, const std::string& name) {
    for (const auto& d : net.layout) {
        if (d.name != name) continue;
        Mat m(static_cast<std::size_t>(d.rows), Vec(static_cast<std::size_t>(d.cols)));
        for (Eigen::Index c = 0; c < d.cols; ++c)
            for (Eigen::Index r = 0; r < d.rows; ++r)
                m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                    net.params[d.offset + c * d.rows + r];  // column-major
        return m;
    }
    throw std::runtime_error("reference: no tensor named " + name);
}

inline Vec matvec(const Mat& m, const Vec& v) {
    Vec out(m.size(), 0.0);
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < v.size(); ++c) out[r] += m[r][c] * v[c];
    return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// seq[t][i] = standardized feature i at second t.
inline double reference_forward(const earlyguard::GruNetwork& net, const Mat& seq) {
    const auto T = seq.size();
    const auto n = static_cast<std::size_t>(net.config.hidden_neurons);
    const int dirs = net.directions();

    Mat input(T);  // per timestep, the layer input vector
    for (std::size_t t = 0; t < T; ++t) input[t] = seq[t];

    for (int layer = 0; layer < net.config.depth; ++layer) {
        Mat output(T, Vec(n * static_cast<std::size_t>(dirs), 0.0));
        for (int dir = 0; dir < dirs; ++dir) {
            const std::string base =
                "layer" + std::to_string(layer) + (dir == 0 ? ".fwd." : ".bwd.");
            const Mat W_z = tensor_of(net, base + "W_z"), W_r = tensor_of(net, base + "W_r"),
                      W_h = tensor_of(net, base + "W_h"), U_z = tensor_of(net, base + "U_z"),
                      U_r = tensor_of(net, base + "U_r"), U_h = tensor_of(net, base + "U_h");
            const Mat b_z = tensor_of(net, base + "b_z"), b_r = tensor_of(net, base + "b_r"),
                      b_h = tensor_of(net, base + "b_h");

            Vec h(n, 0.0);
            for (std::size_t step = 0; step < T; ++step) {
                const std::size_t t = dir == 0 ? step : T - 1 - step;
                const Vec& x = input[t];
                const Vec wzx = matvec(W_z, x), wrx = matvec(W_r, x), whx = matvec(W_h, x);
                const Vec uzh = matvec(U_z, h), urh = matvec(U_r, h);
                Vec z(n), r(n);
                for (std::size_t i = 0; i < n; ++i) {
                    z[i] = sigmoid(wzx[i] + uzh[i] + b_z[i][0]);
                    r[i] = sigmoid(wrx[i] + urh[i] + b_r[i][0]);
                }
                Vec rh(n);
                for (std::size_t i = 0; i < n; ++i) rh[i] = r[i] * h[i];
                const Vec uhrh = matvec(U_h, rh);
                Vec hc(n), hnew(n);
                for (std::size_t i = 0; i < n; ++i) {
                    hc[i] = std::tanh(whx[i] + uhrh[i] + b_h[i][0]);
                    hnew[i] = (1.0 - z[i]) * h[i] + z[i] * hc[i];
                }
                h = hnew;
                for (std::size_t i = 0; i < n; ++i)
                    output[t][static_cast<std::size_t>(dir) * n + i] = h[i];
            }
        }
        input = std::move(output);
    }

    const Mat head_w = tensor_of(net, "head.w");
    const Mat head_b = tensor_of(net, "head.b");
    double logit = head_b[0][0];
    // forward direction's final state sits at the last second, the backward
    // direction's at second 0
    for (std::size_t i = 0; i < n; ++i) logit += head_w[0][i] * input[T - 1][i];
    if (dirs == 2)
        for (std::size_t i = 0; i < n; ++i) logit += head_w[0][n + i] * input[0][n + i];
    return sigmoid(logit);
}

}  // namespace refgru
