#pragma once

#include <string>

#include "obscert/certifier.hpp"
#include "obscert/levy_symbol.hpp"
#include "obscert/simgroup.hpp"
#include "obscert/verify.hpp"

namespace obscert {

// JSON documents use a fixed key order. Non-finite numbers are written as null; every
// quantity that can overflow also has a log-scale field next to it.
std::string certificate_json(const Certificate& cert, int indent = 2);
std::string admissibility_json(const AdmissibilityReport& rep, int indent = 2);
std::string trace_json(const IterationTrace& trace, int indent = 2);
std::string verification_json(const VerificationReport& rep, int indent = 2);
std::string ls_constants_json(const LsConstants& ls, int indent = 2);
std::string dissipation_json(const DissipationResult& d, double lambda, int indent = 2);

// One header line, then one row per record. Numbers use 17 significant digits.
std::string trace_csv(const IterationTrace& trace);
std::string verification_csv(const VerificationReport& rep);

// Shortest round-trip text for a double; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double x);

// Modal or grid states. CSV holds one "re,im" line per entry; the raw format is
// interleaved re, im as little-endian IEEE-754 float64, row-major, no header.
void write_state_csv(const std::string& path, const cvec& x);
cvec read_state_csv(const std::string& path);
void write_state_raw(const std::string& path, const cvec& x);
cvec read_state_raw(const std::string& path);

}  // namespace obscert
