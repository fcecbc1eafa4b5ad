#ifndef TRISTEP_NATIVE_EMIT_HPP
#define TRISTEP_NATIVE_EMIT_HPP

#include <sstream>
#include <string>

#include "tristep/pattern.hpp"

namespace tristep {

// Emits the C-with-inline-assembly source for one benchmark case: the AArch64
// barrier/access/flush sequences per step plus clock_gettime timing around
// Step3. Text generation only; nothing here compiles or runs the output.
namespace native {

inline std::string access_block(const char* opcode, const std::string& addr_expr) {
  std::ostringstream s;
  s << "  asm __volatile__(\n"
       "      \"DSB SY            \\n\"\n"
       "      \"ISB               \\n\"\n"
       "      \"" << opcode << " %0, [%1]      \\n\"\n"
       "      \"DSB SY            \\n\"\n"
       "      \"ISB               \\n\"\n";
  if (std::string(opcode) == "LDR")
    s << "      : \"=r\"(scratch)\n      : \"r\"(" << addr_expr << "));\n";
  else
    s << "      :\n      : \"r\"(scratch), \"r\"(" << addr_expr << "));\n";
  return s.str();
}

inline std::string flush_block(const std::string& addr_expr) {
  std::ostringstream s;
  s << "  asm __volatile__(\n"
       "      \"DSB ISH           \\n\"\n"
       "      \"ISB               \\n\"\n"
       "      \"DC CIVAC, %0      \\n\"\n"
       "      \"DSB ISH           \\n\"\n"
       "      \"ISB               \\n\"\n"
       "      :\n      : \"r\"(" << addr_expr << "));\n";
  return s.str();
}

inline std::string step_body(const StepOp& step, OpKind op, int index) {
  std::ostringstream s;
  std::string addr = std::string("step") + std::to_string(index + 1) + "_addr";
  s << "static void step" << (index + 1) << "(volatile uint8_t* array) {\n";
  if (step.is_star()) {
    s << "  (void)array;  /* unconstrained step: no operation */\n}\n";
    return s.str();
  }
  s << "  uint64_t scratch = 0;\n  (void)scratch;\n";
  s << "  volatile uint8_t* " << addr << " = array + " << to_string(step.target) << "_OFFSET;\n";
  switch (op) {
    case OpKind::Read:
      s << access_block("LDR", addr);
      break;
    case OpKind::Write:
      s << access_block("STR", addr);
      break;
    case OpKind::Flush:
      s << flush_block(addr);
      break;
    case OpKind::RemoteWrite:
      s << "  /* executed by the peer thread pinned to the remote core */\n";
      s << access_block("STR", addr);
      break;
    case OpKind::None:
      break;
  }
  s << "}\n";
  return s.str();
}

}  // namespace native

inline std::string emit_native_step_code(const ConcreteCase& c) {
  std::ostringstream s;
  s << "/* benchmark pattern " << c.pattern_id << " case " << c.case_index << "\n"
    << " * steps: " << triple_string(c.steps) << "\n"
    << " * ops: " << to_string(c.ops[0]) << " / " << to_string(c.ops[1]) << " / "
    << to_string(c.ops[2]) << ", scheduling: " << to_string(c.sched) << "\n */\n";
  s << "#define _GNU_SOURCE\n"
       "#include <sched.h>\n"
       "#include <stdint.h>\n"
       "#include <stdio.h>\n"
       "#include <stdlib.h>\n"
       "#include <string.h>\n"
       "#include <time.h>\n\n";
  s << "#define u_OFFSET        (secret_offset)\n"
       "#define inv_u_OFFSET    (secret_offset)\n"
       "#define a_OFFSET        (0u)\n"
       "#define inv_a_OFFSET    (0u)\n"
       "#define a_alias_OFFSET  (TOTAL_SIZE / ASSOCIATIVITY)\n"
       "#define inv_a_alias_OFFSET a_alias_OFFSET\n"
       "#define NIB_OFFSET      ((NUM_SETS / 2) * LINE_SIZE)\n"
       "#define inv_NIB_OFFSET  NIB_OFFSET\n\n"
       "#define TOTAL_SIZE      (32u * 1024u)\n"
       "#define ASSOCIATIVITY   (4u)\n"
       "#define LINE_SIZE       (64u)\n"
       "#define NUM_SETS        (TOTAL_SIZE / (ASSOCIATIVITY * LINE_SIZE))\n\n"
       "static size_t secret_offset; /* filled per candidate by the driver */\n\n";
  s << "/* pin the calling thread; core isolation is environment specific */\n"
       "static void pin_to_core(int core) {\n"
       "  cpu_set_t set;\n"
       "  CPU_ZERO(&set);\n"
       "  CPU_SET(core, &set);\n"
       "  sched_setaffinity(0, sizeof(set), &set);\n"
       "}\n\n"
       "static uint64_t now_ns(void) {\n"
       "  struct timespec ts;\n"
       "  clock_gettime(CLOCK_MONOTONIC, &ts);\n"
       "  return (uint64_t)ts.tv_sec * 1000000000ull + (uint64_t)ts.tv_nsec;\n"
       "}\n\n";
  for (int i = 0; i < 3; ++i) s << native::step_body(c.steps[i], c.ops[i], i) << "\n";
  s << "int main(int argc, char** argv) {\n"
       "  static uint8_t array[8u * 1024u * 1024u];\n"
       "  memset(array, 1, sizeof(array));\n"
       "  secret_offset = argc > 1 ? (size_t)strtoul(argv[1], 0, 0) : a_OFFSET;\n"
       "  pin_to_core(argc > 2 ? atoi(argv[2]) : 0);\n"
       "  step1(array);\n"
       "  step2(array);\n"
       "  uint64_t t0 = now_ns();\n"
       "  step3(array);\n"
       "  uint64_t t1 = now_ns();\n"
       "  printf(\"%llu\\n\", (unsigned long long)(t1 - t0));\n"
       "  return 0;\n"
       "}\n";
  return s.str();
}

}  // namespace tristep

#endif
