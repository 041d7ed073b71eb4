#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "qwloc/coin.hpp"
#include "qwloc/disorder.hpp"
#include "qwloc/dynamics.hpp"
#include "qwloc/spectral.hpp"
#include "qwloc/walk.hpp"

namespace qwloc {

// Insertion-ordered JSON keeps serialized configs and manifests stable.
using Json = nlohmann::ordered_json;

// Permutations travel as arrays of signed coin indices in canonical
// order; coin matrices as row-major arrays of [re, im] pairs.
Json permutation_to_json(const Permutation& pi);
Permutation permutation_from_json(const Json& j, int d);
Json coin_to_json(const CoinMatrix& coin);
CoinMatrix coin_from_json(const Json& j);

Json distribution_to_json(const PhaseDistribution& dist);
PhaseDistribution distribution_from_json(const Json& j);

Json blocks_to_json(const std::vector<InvariantBlock>& blocks, int d);

// CSV emitters; all doubles printed with %.17g so files are bit-stable.
std::string field_csv(const PhaseField& field);                      // y_1..y_d,tau,theta
std::string triplets_csv(const SparseOp& op);                        // row,col,re,im
std::string spectrum_csv(const SpectrumResult& spectrum);            // index,re,im,residual
std::string dispersion_csv(const DispersionResult& disp);            // k_1..k_d,band,re,im
std::string traces_csv(const std::vector<MomentTrace>& traces);      // realization,n,p,moment

std::string format_double(double v);
Json complex_to_json(const Complex& z);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace qwloc
