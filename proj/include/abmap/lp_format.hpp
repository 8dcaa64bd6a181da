#pragma once

// CPLEX-style LP text for IntegerProgram.
//
// Layout written by export_lp_text:
//
//   \ comment lines
//   Maximize
//    obj: <every variable, zero coefficients included, in index order>
//   Subject To
//    <row>: <terms> <= | >= | = <rhs>      one line per bound; a row with two
//                                           distinct finite bounds becomes
//                                           <row>_lo (>=) and <row>_hi (<=)
//   Bounds
//    <lo> <= <var> <= <hi> | <var> >= <lo> | <var> = <v> | <var> free
//   General
//    <integer variables>
//   Binary
//    <binary variables>
//   End
//
// Long term lists continue on indented lines. Numbers use the shortest
// decimal form that reads back to the same double. Binary variables with
// bounds [0, 1] are omitted from Bounds. Rows with no finite bound are not
// written.

#include <string>
#include <string_view>

#include "abmap/integer_program.hpp"

namespace abmap {

std::string export_lp_text(const IntegerProgram& program);

/// Reads the subset of the LP format produced by export_lp_text, plus
/// Minimize objectives (negated into maximization) and CPLEX default bounds.
/// Variables not listed under General or Binary are read as integers, since
/// IntegerProgram has no continuous kind. Throws std::invalid_argument on
/// malformed input.
IntegerProgram parse_lp_text(std::string_view text);

}  // namespace abmap
