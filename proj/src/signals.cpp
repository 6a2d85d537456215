#include "agc/signals.h"

namespace agc {

std::string_view signal_name(Signal s) {
  switch (s) {
    case Signal::kDeltaF1:
      return "delta_f1";
    case Signal::kDeltaF2:
      return "delta_f2";
    case Signal::kDeltaPTie:
      return "delta_p_tie";
  }
  return "unknown";
}

std::optional<Signal> signal_from_name(std::string_view name) {
  for (Signal s : kAllSignals) {
    if (signal_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view label_name(Label l) {
  return l == Label::kAttack ? "attack" : "normal";
}

std::optional<Label> label_from_name(std::string_view name) {
  if (name == "attack") return Label::kAttack;
  if (name == "normal") return Label::kNormal;
  return std::nullopt;
}

}  // namespace agc
