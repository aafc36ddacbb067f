#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "metamarket/checks.hpp"
#include "metamarket/config.hpp"
#include "metamarket/coupled.hpp"
#include "metamarket/hmm.hpp"
#include "metamarket/resolvent.hpp"
#include "metamarket/trajectory.hpp"

namespace metamarket {

// JSON documents are returned as text so that callers need no JSON headers.
// Non-finite numbers are written as null.

std::string to_json(const MetastabilityReport& report, int indent = 2);
std::string to_json(const ConditionReport& report, int indent = 2);
std::string to_json(const JointReport& report, int indent = 2);
std::string to_json(const HmmSpec& spec, int indent = 2);
std::string to_json(const HmmFit& fit, int indent = 2);
std::string to_json(const RestartFit& fit, int indent = 2);

/// Throws InputError on malformed or invalid specs.
HmmSpec hmm_spec_from_json(const std::string& text);

/// Everything `analyze` needs to rebuild a trajectory from its event file.
struct RunSummary {
  MarketParams market;
  CouplingParams coupling;
  std::uint64_t seed = 0;
  std::uint64_t run_index = 0;
  int initial_eta_plus = 0;
  int initial_x = 1;
  long long s0 = 0;
  double horizon = 0.0;
  bool compacted = false;
  std::string status;
  std::uint64_t market_jumps = 0;
  std::uint64_t observable_rings = 0;
  std::uint64_t events_written = 0;
  OccupationReport occupation;
};

RunSummary make_summary(const Trajectory& traj, long long s0, std::uint64_t events_written);
std::string to_json(const RunSummary& summary, int indent = 2);
RunSummary summary_from_json(const std::string& text);

/// Reads the streamed event format; throws InputError with a line number.
std::vector<Event> read_event_csv(std::istream& is);

/// Grid rows: t, eta_plus / N, S(t), well label.
struct GridRow {
  double t = 0.0;
  double eta_fraction = 0.0;
  long long price = 0;
  WellLabel label = WellLabel::Delta;
};

std::vector<GridRow> grid_rows(const Trajectory& traj, long long s0);
void write_grid_csv(std::ostream& os, const std::vector<GridRow>& rows);
std::vector<GridRow> read_grid_csv(std::istream& is);

const char* label_name(WellLabel label) noexcept;
WellLabel parse_label_name(const std::string& name);

/// One symbol per line; blank lines and `#` comments skipped.
std::vector<int> read_observations(std::istream& is);

/// File helpers throwing IoError (write) or InputError (missing input).
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace metamarket
