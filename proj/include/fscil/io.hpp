#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fscil/core.hpp"
#include "fscil/protocol.hpp"
#include "fscil/synth.hpp"

namespace fscil::io {

inline constexpr int kFormatVersion = 1;

/// Embedding file layout (UTF-8 text):
///
///   format_version=1 dim=D total_classes=C base_classes=B sessions=T way=N shot=K
///   <train|test> <session> <class_id> v1 ... vD
///   ...
///
/// Header keys appear once each, in that order. Numbers use '.' as decimal
/// point regardless of locale; values are written in shortest round-trip form.
void write_dataset(const SessionDataset& dataset, std::ostream& out);
void write_dataset(const SessionDataset& dataset, const std::filesystem::path& path);

/// Throws ParseError for malformed input (messages name the header or the
/// 1-based line, e.g. "row 7: expected 8 values, got 7") and ValidationError
/// when the parsed dataset violates an invariant.
SessionDataset read_dataset(std::istream& in);
SessionDataset load_dataset(const std::filesystem::path& path);

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(const std::string& name);

void write_report(const ProtocolReport& report, std::ostream& out, ReportFormat format);
void write_report(const ProtocolReport& report, const std::filesystem::path& path, ReportFormat format);

std::string report_to_json(const ProtocolReport& report);
ProtocolReport report_from_json(const std::string& text);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// JSON synth spec, keys mirroring the gen-synth flags.
std::string synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const std::string& text);
SynthSpec load_synth_spec(const std::filesystem::path& path);

}  // namespace fscil::io
