#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "shoprl/catalog.hpp"
#include "shoprl/policy.hpp"
#include "shoprl/train.hpp"
#include "shoprl/trajectory.hpp"

namespace shoprl {

// Every reader throws FormatError on malformed input or a schema version other
// than 1, and NotFoundError when the file cannot be opened.

void write_catalog(std::ostream& os, const Catalog& catalog);
Catalog read_catalog(std::istream& is);
void write_catalog(const std::filesystem::path& path, const Catalog& catalog);
Catalog read_catalog(const std::filesystem::path& path);

void write_goals(std::ostream& os, std::span<const Goal> goals);
std::vector<Goal> read_goals(std::istream& is);
void write_goals(const std::filesystem::path& path, std::span<const Goal> goals);
std::vector<Goal> read_goals(const std::filesystem::path& path);

/// One line per step (goal_id, step, obs_key, page, observation tokens,
/// available ids, action), then a final line with source, reward and breakdown.
void write_trajectories(std::ostream& os, std::span<const Trajectory> trajectories);
void write_trajectories(const std::filesystem::path& path, std::span<const Trajectory> trajectories);

/// Observations are rebuilt by replaying the recorded actions against `env`;
/// a replay that disagrees with the recorded obs_keys or reward is a FormatError.
std::vector<Trajectory> read_trajectories(std::istream& is, const Env& env,
                                          std::span<const Goal> goals);
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path, const Env& env,
                                          std::span<const Goal> goals);

void write_pairs(std::ostream& os, std::span<const PreferencePair> pairs);
void write_pairs(const std::filesystem::path& path, std::span<const PreferencePair> pairs);

/// {v, d, k, P, Q, v_head, seed_lineage}; P and Q are written row-major k x d.
void write_checkpoint(std::ostream& os, const PolicyParams& params);
PolicyParams read_checkpoint(std::istream& is);
void write_checkpoint(const std::filesystem::path& path, const PolicyParams& params);
PolicyParams read_checkpoint(const std::filesystem::path& path);

}  // namespace shoprl
