#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace agc {

// The three recorded measurements. Order is significant: features, traces
// and prompts all enumerate signals in this order.
enum class Signal { kDeltaF1 = 0, kDeltaF2 = 1, kDeltaPTie = 2 };

inline constexpr std::array<Signal, 3> kAllSignals = {
    Signal::kDeltaF1, Signal::kDeltaF2, Signal::kDeltaPTie};

// "delta_f1", "delta_f2", "delta_p_tie"
std::string_view signal_name(Signal s);
std::optional<Signal> signal_from_name(std::string_view name);

enum class Label { kNormal = 0, kAttack = 1 };

std::string_view label_name(Label l);
std::optional<Label> label_from_name(std::string_view name);

}  // namespace agc
