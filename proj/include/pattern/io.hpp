#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pattern/curriculum.hpp"
#include "pattern/hardness.hpp"
#include "pattern/model_suite.hpp"
#include "pattern/program.hpp"

namespace pattern {

using Json = nlohmann::json;

class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses the compact rendering produced by Program::text(), e.g.
/// `add(line_horizontal,@h1)`. Whitespace is ignored; `overlap` is accepted.
Program parse_program(std::string_view text);

Json grid_to_json(const Grid& g);
/// Accepts a 10x10 array of 0/1 or a 100-character key string.
Grid grid_from_json(const Json& j);

/// {"primitive": name} | {"helper": id} | {"op": name, "args": [...]}
Json program_to_json(const Program& p);
Program program_from_json(const Json& j);

Json library_to_json(const Library& lib);
Library library_from_json(const Json& j);

Json curriculum_to_json(const Curriculum& c);
/// Validates that every solution evaluates to its target.
Curriculum curriculum_from_json(const Json& j);

Json run_spec_to_json(const RunSpec& s);
RunSpec run_spec_from_json(const Json& j);
Json run_record_to_json(const RunRecord& r);
RunRecord run_record_from_json(const Json& j);

Json flat_corpus_to_json(const hardness::FlatCorpus& fc);
hardness::FlatCorpus flat_corpus_from_json(const Json& j);
/// {"left": n, "right": m, "adjacency": [[j, ...] per left vertex]}
Json graph_to_json(const hardness::BipartiteGraph& g);
hardness::BipartiteGraph graph_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace pattern
