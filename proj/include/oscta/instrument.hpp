#pragma once

#include "oscta/while_ast.hpp"

namespace oscta {

struct InstrumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ω(c): reify the leakage of c into explicit xl assignments.
//   x:=e        ~> xl := xl : r(f⃗); x := e
//   x[e1]:=e    ~> xl := xl : w(e1) : r(f⃗); x[e1] := e
//   if e ...    ~> xl := xl : b(e) : r(f⃗); if e then ω(c1) else ω(c2) fi
//   while e c   ~> xl := xl : b(e) : r(f⃗); while e do ω(c); xl := xl : b(e) : r(f⃗) od
// Requires xl ∉ fv(c).
CmdPtr instrument(const CmdPtr& c);

// ω(c) with all xl assignments erased is c again.
CmdPtr erase_leak_assignments(const CmdPtr& c);

}  // namespace oscta
