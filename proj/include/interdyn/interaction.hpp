#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "interdyn/masking.hpp"

namespace interdyn {

// Per-subset split parameter: o_and[S] = v(x_S)/2 + gamma[S],
// o_or[S] = v(x_S)/2 - gamma[S].
struct GammaVector {
  std::vector<double> values;

  static GammaVector zeros(std::size_t n) { return {std::vector<double>(subset_count(n), 0.0)}; }
  std::size_t size() const { return values.size(); }
};

struct SplitOutputs {
  std::vector<double> o_and;
  std::vector<double> o_or;
};

// AND-OR surrogate of one masked-output table. Index 0 (the empty set) of
// i_and / i_or is unused and kept at 0; the constant term lives in `bias`.
struct InteractionDecomposition {
  std::size_t n = 0;
  std::vector<double> i_and;
  std::vector<double> i_or;
  double bias = 0.0;
  GammaVector gamma;
  std::string source_table_id;
};

// log2 of a power-of-two length no larger than 2^16. Throws DimensionError
// for other lengths.
std::size_t variables_for_length(std::size_t length);

// Raw lattice transforms on length-2^n vectors, in place, O(n 2^n).
//   subset_zeta:      a[S] <- sum_{T ⊆ S} a[T]
//   subset_mobius:    inverse of subset_zeta
//   superset_zeta:    a[S] <- sum_{T ⊇ S} a[T]
//   superset_mobius:  inverse of superset_zeta; equals the transpose of
//                     subset_mobius
void subset_zeta(std::span<double> a);
void subset_mobius(std::span<double> a);
void superset_zeta(std::span<double> a);
void superset_mobius(std::span<double> a);

// values[S] -> values[N \ S].
std::vector<double> complement_permute(std::span<const double> values);

SplitOutputs split_outputs(const MaskedOutputTable& table, const GammaVector& gamma);

// I_and[T] = sum_{L ⊆ T} (-1)^{|T|-|L|} o_and[L] for nonempty T.
std::vector<double> mobius_and(std::span<const double> o_and);

// I_or[T] = -sum_{L ⊆ T} (-1)^{|T|-|L|} o_or[N \ L] for nonempty T.
std::vector<double> mobius_or(std::span<const double> o_or);

InteractionDecomposition decompose(const MaskedOutputTable& table, const GammaVector& gamma);

// Surrogate output on x_S:
//   bias + sum_{∅≠T⊆S} I_and[T] + sum_{T∩S≠∅} I_or[T].
// Evaluates the trigger sums term by term in O(2^n).
double reconstruct(const InteractionDecomposition& decomp, SubsetMask subset);

// reconstruct() for every mask at once, via zeta transforms in O(n 2^n).
std::vector<double> reconstruct_all(const InteractionDecomposition& decomp);

// max_S |reconstruct_all(decomp)[S] - table[S]|.
double max_reconstruction_error(const InteractionDecomposition& decomp,
                                const MaskedOutputTable& table);

nlohmann::json decomposition_to_json(const InteractionDecomposition& decomp);
InteractionDecomposition decomposition_from_json(const nlohmann::json& doc);

}  // namespace interdyn
