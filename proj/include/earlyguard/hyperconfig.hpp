#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace earlyguard {

enum class Regularizer { none, l1, l2, l1_and_l2 };

bool reg_has_l1(Regularizer r);
bool reg_has_l2(Regularizer r);
std::string_view regularizer_name(Regularizer r);   // "None", "l1", "l2", "l1 and l2"
Regularizer parse_regularizer(std::string_view s);  // throws ValidationError

/// One point in the hyperparameter search space.
struct HyperConfig {
    int depth = 1;                  // stacked recurrent layers, 1..3
    bool bidirectional = false;
    int hidden_neurons = 32;        // 1..500
    int epochs = 10;                // 1..500
    double dropout_rate = 0.0;      // {0.0, 0.1, ..., 0.5}
    Regularizer weight_reg = Regularizer::none;
    Regularizer bias_reg = Regularizer::none;
    int batch_size = 32;            // {32, 64, 128, 256}
    int train_time_seconds = 5;     // snapshot time used for training, 1..20

    void validate() const;  // throws ValidationError when outside the domains

    bool operator==(const HyperConfig&) const = default;
};

// JSON form uses the long field names so config files read like the
// experiment tables: Depth, Bidirectional, Hidden neurons, Epochs,
// Dropout rate, Weight regularisation, Bias regularisation, Batch size,
// Time into execution (s).
nlohmann::json hyperconfig_to_json(const HyperConfig& c);
HyperConfig hyperconfig_from_json(const nlohmann::json& j);
HyperConfig load_hyperconfig(const std::filesystem::path& path);
void save_hyperconfig(const HyperConfig& c, const std::filesystem::path& path);

/// Stable fingerprint of a config (FNV-1a over the canonical JSON form).
std::uint64_t config_digest(const HyperConfig& c);

/// Bundled example configurations ("A", "B", "C") used by the docs and the
/// test-suite; "A" is the default model of the demo pipeline.
HyperConfig preset_config(std::string_view name);

}  // namespace earlyguard
