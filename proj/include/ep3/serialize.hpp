#pragma once

// JSON and CSV encodings. Complex numbers are [re, im] pairs in JSON and
// re_/im_ column pairs in CSV. Doubles are printed with 17 significant digits
// so that reruns are byte-identical.

#include <ostream>
#include <string>

#include "ep3/epfind.hpp"
#include "ep3/jordan.hpp"
#include "ep3/puiseux.hpp"
#include "ep3/tracking.hpp"
#include "json.hpp"

namespace ep3 {

using Json = nlohmann::ordered_json;

Json complex_json(Complex z);
Json vector_json(const ComplexVector& v);
Json to_json(const JordanChain& chain);
Json to_json(const PuiseuxClass& cls);
/// Loop summary: permutation, signs, phases, cycle_structure, crossings, ...
Json to_json(const LoopReport& report);
Json to_json(const ExponentFit& fit);
Json to_json(const EPSearchResult& result);
Json error_json(const Error& error);

/// cycle, step, phi, branch, re_lambda, im_lambda
void write_loop_csv(std::ostream& out, const LoopReport& report);

/// %.17g
std::string format_double(double x);

}  // namespace ep3
