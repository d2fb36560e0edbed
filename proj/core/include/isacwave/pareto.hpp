#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "isacwave/objectives.hpp"

namespace isacwave {

/// a >= b in every component and a > b in at least one. Throws
/// std::invalid_argument on a dimension mismatch.
bool dominates(std::span<const double> a, std::span<const double> b);

/// a_i >= b_i - eps for all i and a_j > b_j + eps for some j.
bool epsilon_dominates(std::span<const double> a, std::span<const double> b, double eps);

/// Indices (ascending) of the non-dominated vectors. Throws on empty input.
std::vector<std::size_t> pareto_set(std::span<const std::vector<double>> vectors);
std::vector<std::size_t> pareto_set(std::span<const ObjectiveVector> vectors);

/// Prunes near-duplicates from a strict Pareto set. Members are visited in
/// order of decreasing component sum (ties: lower index first); a member is
/// dropped when an already retained member epsilon-dominates it. The first
/// visited member is always retained. Result indices are ascending.
std::vector<std::size_t> epsilon_filter(std::span<const std::vector<double>> vectors,
                                        std::span<const std::size_t> pareto, double eps);
std::vector<std::size_t> epsilon_filter(std::span<const ObjectiveVector> vectors,
                                        std::span<const std::size_t> pareto, double eps);

using LabelBits = std::vector<std::uint8_t>;

/// Throws std::out_of_range for an index >= k.
LabelBits encode_labels(std::span<const std::size_t> indices, std::size_t k);

} // namespace isacwave
