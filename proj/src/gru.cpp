#include "earlyguard/gru.hpp"

#include <cmath>

#include "earlyguard/errors.hpp"
#include "earlyguard/rng.hpp"

namespace earlyguard {

namespace {

constexpr const char* kGateNames[9] = {"W_z", "W_r", "W_h", "U_z", "U_r", "U_h", "b_z", "b_r", "b_h"};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<TensorDesc> tensor_layout(const HyperConfig& config, int input_dim) {
    config.validate();
    const int dirs = config.bidirectional ? 2 : 1;
    const Eigen::Index n = config.hidden_neurons;
    std::vector<TensorDesc> layout;
    layout.reserve(static_cast<std::size_t>(config.depth * dirs * 9 + 2));

    Eigen::Index offset = 0;
    Eigen::Index d_in = input_dim;
    for (int layer = 0; layer < config.depth; ++layer) {
        for (int dir = 0; dir < dirs; ++dir) {
            const char* dname = dir == 0 ? "fwd" : "bwd";
            for (int g = 0; g < 9; ++g) {
                TensorDesc d;
                d.name = "layer" + std::to_string(layer) + "." + dname + "." + kGateNames[g];
                d.layer = layer;
                d.direction = dir;
                d.is_bias = g >= 6;
                d.rows = n;
                d.cols = g < 3 ? d_in : (g < 6 ? n : 1);
                d.offset = offset;
                offset += d.size();
                layout.push_back(std::move(d));
            }
        }
        d_in = n * dirs;
    }
    TensorDesc hw{"head.w", -1, -1, 1, n * dirs, offset, false};
    offset += hw.size();
    layout.push_back(std::move(hw));
    TensorDesc hb{"head.b", -1, -1, 1, 1, offset, true};
    layout.push_back(std::move(hb));
    return layout;
}

Eigen::Index parameter_count(const HyperConfig& config, int input_dim) {
    const Eigen::Index n = config.hidden_neurons;
    const int dirs = config.bidirectional ? 2 : 1;
    Eigen::Index total = 0;
    Eigen::Index d_in = input_dim;
    for (int layer = 0; layer < config.depth; ++layer) {
        total += dirs * 3 * (n * d_in + n * n + n);
        d_in = n * dirs;
    }
    return total + n * dirs + 1;
}

const TensorDesc& GruNetwork::gate_desc(int layer, int direction, int g) const {
    const auto idx = static_cast<std::size_t>((layer * directions() + direction) * 9 + g);
    return layout[idx];
}

GruNetwork init_params(const HyperConfig& config, std::uint64_t seed, int input_dim) {
    GruNetwork net;
    net.config = config;
    net.input_dim = input_dim;
    net.layout = tensor_layout(config, input_dim);
    net.init_seed = seed;

    const TensorDesc& last = net.layout.back();
    net.params = Eigen::VectorXd::Zero(last.offset + last.size());

    Rng rng(derive_seed(seed, 0x696e6974ULL));  // one stream, tensors drawn in declared order
    for (const auto& d : net.layout) {
        if (d.is_bias) continue;
        // fan_in = inputs feeding one unit (cols), fan_out = units fed (rows).
        const double limit = std::sqrt(6.0 / static_cast<double>(d.cols + d.rows));
        for (Eigen::Index i = 0; i < d.size(); ++i) net.params[d.offset + i] = rng.uniform(-limit, limit);
    }
    return net;
}

double gru_forward(const GruNetwork& net, const StdSequence& seq, bool training_mode,
                   std::uint64_t dropout_seed, ForwardCache* cache) {
    if (net.params.size() == 0) throw ExperimentError("forward: network has no parameters");
    if (seq.rows() != net.input_dim)
        throw ValidationError("forward: sequence has " + std::to_string(seq.rows()) + " features, expected " +
                              std::to_string(net.input_dim));
    const Eigen::Index T = seq.cols();
    if (T < 2)
        throw ValidationError("forward: sequence length " + std::to_string(T) +
                              " < 2; a single snapshot carries no sequence to analyse");

    const int dirs = net.directions();
    const Eigen::Index n = net.config.hidden_neurons;
    const double p = net.config.dropout_rate;
    const bool use_dropout = training_mode && p > 0.0;

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.inputs.assign(static_cast<std::size_t>(net.config.depth), Eigen::MatrixXd());
    c.dirs.assign(static_cast<std::size_t>(net.config.depth), {});
    c.masks.assign(static_cast<std::size_t>(net.config.depth), Eigen::MatrixXd());

    Eigen::MatrixXd input = seq;
    for (int layer = 0; layer < net.config.depth; ++layer) {
        c.inputs[static_cast<std::size_t>(layer)] = input;
        Eigen::MatrixXd output(n * dirs, T);

        for (int dir = 0; dir < dirs; ++dir) {
            const auto W_z = net.view(net.gate_desc(layer, dir, 0));
            const auto W_r = net.view(net.gate_desc(layer, dir, 1));
            const auto W_h = net.view(net.gate_desc(layer, dir, 2));
            const auto U_z = net.view(net.gate_desc(layer, dir, 3));
            const auto U_r = net.view(net.gate_desc(layer, dir, 4));
            const auto U_h = net.view(net.gate_desc(layer, dir, 5));
            const auto b_z = net.view(net.gate_desc(layer, dir, 6));
            const auto b_r = net.view(net.gate_desc(layer, dir, 7));
            const auto b_h = net.view(net.gate_desc(layer, dir, 8));

            // Input projections for the whole sequence at once.
            const Eigen::MatrixXd PZ = W_z * input;
            const Eigen::MatrixXd PR = W_r * input;
            const Eigen::MatrixXd PH = W_h * input;

            LayerDirCache& lc = c.dirs[static_cast<std::size_t>(layer)][static_cast<std::size_t>(dir)];
            lc.Z.resize(n, T);
            lc.R.resize(n, T);
            lc.Hc.resize(n, T);
            lc.H.resize(n, T);

            Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(n);
            for (Eigen::Index step = 0; step < T; ++step) {
                const Eigen::Index t = dir == 0 ? step : T - 1 - step;
                const Eigen::VectorXd z = (PZ.col(t) + b_z.col(0) + U_z * h_prev).unaryExpr([](double v) { return sigmoid(v); });
                const Eigen::VectorXd r = (PR.col(t) + b_r.col(0) + U_r * h_prev).unaryExpr([](double v) { return sigmoid(v); });
                const Eigen::VectorXd hc =
                    (PH.col(t) + b_h.col(0) + U_h * (r.cwiseProduct(h_prev))).array().tanh().matrix();
                const Eigen::VectorXd h =
                    (Eigen::VectorXd::Ones(n) - z).cwiseProduct(h_prev) + z.cwiseProduct(hc);
                if (!h.allFinite())
                    throw ExperimentError("forward: non-finite state at layer " + std::to_string(layer) +
                                          (dir == 0 ? " fwd" : " bwd") + " timestep " + std::to_string(t));
                lc.Z.col(t) = z;
                lc.R.col(t) = r;
                lc.Hc.col(t) = hc;
                lc.H.col(t) = h;
                h_prev = h;
            }
            output.middleRows(dir * n, n) = lc.H;
        }

        if (use_dropout) {
            Rng mrng(derive_seed(dropout_seed, static_cast<std::uint64_t>(layer)));
            Eigen::MatrixXd mask(output.rows(), T);
            const double scale = 1.0 / (1.0 - p);
            for (Eigen::Index t = 0; t < T; ++t)
                for (Eigen::Index i = 0; i < output.rows(); ++i)
                    mask(i, t) = mrng.uniform() < p ? 0.0 : scale;
            c.masks[static_cast<std::size_t>(layer)] = mask;
            output = output.cwiseProduct(mask);
        }
        input = std::move(output);
    }

    c.top_output = input;
    c.feature.resize(n * dirs);
    c.feature.head(n) = c.top_output.col(T - 1).head(n);           // forward direction ends at T-1
    if (dirs == 2) c.feature.tail(n) = c.top_output.col(0).tail(n);  // backward direction ends at 0

    const auto hw = net.view(net.head_w_desc());
    const double bias = net.params[net.head_b_desc().offset];
    c.logit = (hw * c.feature)(0, 0) + bias;
    c.score = sigmoid(c.logit);
    if (!std::isfinite(c.score)) throw ExperimentError("forward: non-finite output score");
    return c.score;
}

void gru_backward(const GruNetwork& net, const ForwardCache& cache, int label01, Eigen::VectorXd& grad) {
    const int dirs = net.directions();
    const Eigen::Index n = net.config.hidden_neurons;
    const Eigen::Index T = cache.top_output.cols();

    const double dlogit = cache.score - static_cast<double>(label01);

    // Head.
    {
        const auto& wd = net.head_w_desc();
        Eigen::Map<Eigen::MatrixXd> gw(grad.data() + wd.offset, wd.rows, wd.cols);
        gw += dlogit * cache.feature.transpose();
        grad[net.head_b_desc().offset] += dlogit;
    }

    // Gradient with respect to the (post-dropout) top layer output.
    const auto hw = net.view(net.head_w_desc());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n * dirs, T);
    G.col(T - 1).head(n) += dlogit * hw.row(0).head(n).transpose();
    if (dirs == 2) G.col(0).tail(n) += dlogit * hw.row(0).tail(n).transpose();

    for (int layer = net.config.depth - 1; layer >= 0; --layer) {
        const auto& mask = cache.masks[static_cast<std::size_t>(layer)];
        if (mask.size() != 0) G = G.cwiseProduct(mask);  // through inverted dropout

        const Eigen::MatrixXd& X = cache.inputs[static_cast<std::size_t>(layer)];
        Eigen::MatrixXd dX = Eigen::MatrixXd::Zero(X.rows(), T);

        for (int dir = 0; dir < dirs; ++dir) {
            const LayerDirCache& lc = cache.dirs[static_cast<std::size_t>(layer)][static_cast<std::size_t>(dir)];
            const auto U_z = net.view(net.gate_desc(layer, dir, 3));
            const auto U_r = net.view(net.gate_desc(layer, dir, 4));
            const auto U_h = net.view(net.gate_desc(layer, dir, 5));

            Eigen::MatrixXd DA_z(n, T), DA_r(n, T), DA_h(n, T), Hprev(n, T);
            Eigen::VectorXd carry = Eigen::VectorXd::Zero(n);

            // Walk processing order backwards: last consumed timestep first.
            for (Eigen::Index step = T - 1; step >= 0; --step) {
                const Eigen::Index t = dir == 0 ? step : T - 1 - step;
                const Eigen::Index t_prev = dir == 0 ? t - 1 : t + 1;
                const bool first = step == 0;
                const Eigen::VectorXd h_prev =
                    first ? Eigen::VectorXd::Zero(n) : Eigen::VectorXd(lc.H.col(t_prev));
                Hprev.col(t) = h_prev;

                const Eigen::VectorXd delta = G.col(t).segment(dir * n, n) + carry;
                const auto z = lc.Z.col(t);
                const auto r = lc.R.col(t);
                const auto hc = lc.Hc.col(t);

                const Eigen::VectorXd dhc = delta.cwiseProduct(z);
                const Eigen::VectorXd da_h =
                    dhc.cwiseProduct((1.0 - hc.array().square()).matrix());
                const Eigen::VectorXd ds = U_h.transpose() * da_h;  // wrt r (.) h_prev
                const Eigen::VectorXd dr = ds.cwiseProduct(h_prev);
                const Eigen::VectorXd da_r =
                    dr.cwiseProduct(r).cwiseProduct((1.0 - r.array()).matrix());
                const Eigen::VectorXd dz = delta.cwiseProduct(hc - h_prev);
                const Eigen::VectorXd da_z =
                    dz.cwiseProduct(z).cwiseProduct((1.0 - z.array()).matrix());

                DA_z.col(t) = da_z;
                DA_r.col(t) = da_r;
                DA_h.col(t) = da_h;

                carry = delta.cwiseProduct((1.0 - z.array()).matrix()) + ds.cwiseProduct(r) +
                        U_r.transpose() * da_r + U_z.transpose() * da_z;
            }

            const Eigen::MatrixXd RHprev = lc.R.cwiseProduct(Hprev);
            const auto add = [&](int g, const Eigen::MatrixXd& m) {
                const auto& d = net.gate_desc(layer, dir, g);
                Eigen::Map<Eigen::MatrixXd>(grad.data() + d.offset, d.rows, d.cols) += m;
            };
            add(0, DA_z * X.transpose());
            add(1, DA_r * X.transpose());
            add(2, DA_h * X.transpose());
            add(3, DA_z * Hprev.transpose());
            add(4, DA_r * Hprev.transpose());
            add(5, DA_h * RHprev.transpose());
            add(6, DA_z.rowwise().sum());
            add(7, DA_r.rowwise().sum());
            add(8, DA_h.rowwise().sum());

            const auto W_z = net.view(net.gate_desc(layer, dir, 0));
            const auto W_r = net.view(net.gate_desc(layer, dir, 1));
            const auto W_h = net.view(net.gate_desc(layer, dir, 2));
            dX += W_z.transpose() * DA_z + W_r.transpose() * DA_r + W_h.transpose() * DA_h;
        }
        G = std::move(dX);
    }
}

}  // namespace earlyguard
