#pragma once

// Command-line front end. Exit codes: 0 success, 1 unsafe, unstratifiable or
// unknown query predicate, 2 parse or usage error.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "magicdl/pipeline.hpp"

namespace magicdl {

int cmd_solve(const std::vector<std::string>& files, const std::string& query, const PipelineConfig& config,
              std::ostream& out, std::ostream& err);
int cmd_rewrite(const std::vector<std::string>& files, const std::string& query, const PipelineConfig& config,
                std::ostream& out, std::ostream& err);
int cmd_gen(const std::string& family, std::int64_t size, std::int64_t base, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace magicdl
