#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "obsblock/cutset.hpp"
#include "obsblock/designer.hpp"
#include "obsblock/model.hpp"
#include "obsblock/verify.hpp"

namespace obsblock {

// Network file: {"order", "n", "edges": [{"from", "to", "weights"}],
// "actuation", "measurement"}.
nlohmann::json network_to_json(const IntegratorNetwork& net);
IntegratorNetwork network_from_json(const nlohmann::json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
nlohmann::json parse_json(const std::string& text);

/// Everything needed to re-verify a synthesized gain.
struct DesignRecord {
  IntegratorNetwork network;
  BlockingDesign design;
  Variant variant = Variant::MeasurePosition;
  std::optional<CutsetPlan> plan;
  std::uint64_t seed = 1;
  Tolerances tol;
};

nlohmann::json design_to_json(const DesignRecord& rec);
DesignRecord design_from_json(const nlohmann::json& j);

nlohmann::json verification_to_json(const VerificationReport& rep);

std::string render_cut_report(const IntegratorNetwork& net, const CutsetPlan& plan);
std::string render_verification(const VerificationReport& rep);
std::string render_design_report(const DesignRecord& rec, const SpectralData& open,
                                 const CutsetDesign* cut, const VerificationReport& rep);

/// Dense row-major numeric text, one row per line, full precision.
std::string matrix_text(const MatR& m);

}  // namespace obsblock
