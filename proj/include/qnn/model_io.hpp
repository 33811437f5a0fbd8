#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qnn/network.hpp"

namespace qnn {

/// A network plus optional vertex names, as stored in a model file.
struct ModelFile {
  QuiverNetwork network;
  std::vector<std::string> vertex_names;  // empty when the file has none
};

/// JSON text with format_version "1". Doubles are written in shortest round-trip form.
std::string serialize_model(const QuiverNetwork& net, const std::vector<std::string>& vertex_names = {});

/// Throws ParseError with a JSON-pointer-like locus for malformed documents; quiver and
/// shape violations surface with their own kinds.
ModelFile parse_model(std::string_view text);

ModelFile load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const QuiverNetwork& net,
                const std::vector<std::string>& vertex_names = {});

}  // namespace qnn
