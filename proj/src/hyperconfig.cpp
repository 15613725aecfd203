#include "earlyguard/hyperconfig.hpp"

#include <cmath>
#include <fstream>

#include "earlyguard/errors.hpp"
#include "earlyguard/rng.hpp"

namespace earlyguard {

bool reg_has_l1(Regularizer r) { return r == Regularizer::l1 || r == Regularizer::l1_and_l2; }
bool reg_has_l2(Regularizer r) { return r == Regularizer::l2 || r == Regularizer::l1_and_l2; }

std::string_view regularizer_name(Regularizer r) {
    switch (r) {
        case Regularizer::none: return "None";
        case Regularizer::l1: return "l1";
        case Regularizer::l2: return "l2";
        case Regularizer::l1_and_l2: return "l1 and l2";
    }
    return "None";
}

Regularizer parse_regularizer(std::string_view s) {
    if (s == "None" || s == "none") return Regularizer::none;
    if (s == "l1" || s == "L1") return Regularizer::l1;
    if (s == "l2" || s == "L2") return Regularizer::l2;
    if (s == "l1 and l2" || s == "l1_and_l2") return Regularizer::l1_and_l2;
    throw ValidationError("unknown regularisation '" + std::string(s) + "'");
}

void HyperConfig::validate() const {
    if (depth < 1 || depth > 3) throw ValidationError("Depth must be 1, 2 or 3");
    if (hidden_neurons < 1 || hidden_neurons > 500) throw ValidationError("Hidden neurons must be in [1,500]");
    if (epochs < 1 || epochs > 500) throw ValidationError("Epochs must be in [1,500]");
    const double tenths = dropout_rate * 10.0;
    if (dropout_rate < -1e-9 || dropout_rate > 0.5 + 1e-9 || std::abs(tenths - std::round(tenths)) > 1e-9)
        throw ValidationError("Dropout rate must be one of 0.0, 0.1, ..., 0.5");
    if (batch_size != 32 && batch_size != 64 && batch_size != 128 && batch_size != 256)
        throw ValidationError("Batch size must be one of 32, 64, 128, 256");
    if (train_time_seconds < 1 || train_time_seconds > 20)
        throw ValidationError("Time into execution (s) must be in [1,20]");
}

nlohmann::json hyperconfig_to_json(const HyperConfig& c) {
    return nlohmann::json{
        {"Depth", c.depth},
        {"Bidirectional", c.bidirectional},
        {"Hidden neurons", c.hidden_neurons},
        {"Epochs", c.epochs},
        {"Dropout rate", c.dropout_rate},
        {"Weight regularisation", std::string(regularizer_name(c.weight_reg))},
        {"Bias regularisation", std::string(regularizer_name(c.bias_reg))},
        {"Batch size", c.batch_size},
        {"Time into execution (s)", c.train_time_seconds},
    };
}

HyperConfig hyperconfig_from_json(const nlohmann::json& j) {
    HyperConfig c;
    try {
        c.depth = j.at("Depth").get<int>();
        c.bidirectional = j.at("Bidirectional").get<bool>();
        c.hidden_neurons = j.at("Hidden neurons").get<int>();
        c.epochs = j.at("Epochs").get<int>();
        c.dropout_rate = j.at("Dropout rate").get<double>();
        c.weight_reg = parse_regularizer(j.at("Weight regularisation").get<std::string>());
        c.bias_reg = parse_regularizer(j.at("Bias regularisation").get<std::string>());
        c.batch_size = j.at("Batch size").get<int>();
        if (j.contains("Time into execution (s)")) c.train_time_seconds = j.at("Time into execution (s)").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad hyperparameter config: ") + e.what());
    }
    c.validate();
    return c;
}

HyperConfig load_hyperconfig(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open config file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return hyperconfig_from_json(j);
}

void save_hyperconfig(const HyperConfig& c, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write config file '" + path.string() + "'");
    out << hyperconfig_to_json(c).dump(2) << '\n';
}

std::uint64_t config_digest(const HyperConfig& c) {
    const std::string s = hyperconfig_to_json(c).dump();
    return fnv1a64(s.data(), s.size());
}

HyperConfig preset_config(std::string_view name) {
    HyperConfig c;
    c.bias_reg = Regularizer::none;
    c.batch_size = 64;
    c.train_time_seconds = 5;
    if (name == "A" || name == "a") {
        c.depth = 3;
        c.bidirectional = true;
        c.hidden_neurons = 74;
        c.epochs = 53;
        c.dropout_rate = 0.3;
        c.weight_reg = Regularizer::l2;
    } else if (name == "B" || name == "b") {
        c.depth = 1;
        c.bidirectional = true;
        c.hidden_neurons = 358;
        c.epochs = 112;
        c.dropout_rate = 0.1;
        c.weight_reg = Regularizer::l2;
    } else if (name == "C" || name == "c") {
        c.depth = 2;
        c.bidirectional = false;
        c.hidden_neurons = 195;
        c.epochs = 39;
        c.dropout_rate = 0.1;
        c.weight_reg = Regularizer::l1;
    } else {
        throw ValidationError("unknown preset config '" + std::string(name) + "' (expected A, B or C)");
    }
    c.validate();
    return c;
}

}  // namespace earlyguard
