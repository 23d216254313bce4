#pragma once

#include <cstdint>

#include "oscta/ir_typing.hpp"
#include "oscta/oracle.hpp"
#include "oscta/while_typing.hpp"

namespace oscta {

// Deterministic splitmix64 stream for the program generators.
struct SplitMix {
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }
  int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  bool chance(double p) { return static_cast<double>(next() >> 11) * 0x1.0p-53 < p; }
};

struct WhileGenOptions {
  int max_depth = 4;
  int scalars = 4;
  bool with_array = true;
  int array_len = 2;
  bool allow_branches = true;
  bool allow_loops = true;
  bool literal_indexes_only = false;
  bool all_scalars_input = false;  // X_I = every scalar variable
};

struct GeneratedWhile {
  Policy policy;
  CmdPtr program;
  std::string source;
};

GeneratedWhile gen_while_program(std::uint64_t seed, const WhileGenOptions& opt);

struct IrGenOptions {
  int max_blocks = 6;
  int mem_blocks = 2;
  int block_len = 2;
  bool allow_loops = true;
};

struct GeneratedIr {
  IrProgram program;
  IrPolicy policy;
};

GeneratedIr gen_ir_program(std::uint64_t seed, const IrGenOptions& opt);

struct FuzzFailure {
  std::uint64_t seed = 0;
  std::string kind;  // "soundness" | "internal"
  std::string program;
  std::string policy;
  std::string detail;
};

struct FuzzReport {
  int count = 0;
  int accepted = 0;
  int rejected = 0;
  int oracle_holds = 0;
  int oracle_counterexamples = 0;
  int incompleteness = 0;  // oracle holds, checker rejects
  int oracle_skipped = 0;  // budget or infrastructure limits
  int soundness_failures = 0;
  int internal_errors = 0;
  std::vector<FuzzFailure> failures;

  std::string to_json() const;
};

// Generate `count` programs; every constant-time Accept must pass the dynamic
// constant-time oracle. A soundness failure is recorded with a minimized
// artifact and fails the harness.
FuzzReport fuzz_while(std::uint64_t seed, int count, const WhileGenOptions& gen,
                      const EnumSpec& spec);
FuzzReport fuzz_ir(std::uint64_t seed, int count, const IrGenOptions& gen, const EnumSpec& spec,
                   const IrTransferOptions& transfer = {});

std::string policy_to_json(const Policy& p);
std::string ir_policy_to_json(const IrPolicy& p);

}  // namespace oscta
