#pragma once

#include "impgraph/scene.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace impgraph {

inline constexpr char kDatasetMagic[4] = {'I', 'G', 'D', 'S'};
inline constexpr std::uint32_t kDatasetVersion = 1;

/// Little-endian layout; see docs/FILE_FORMATS.md.
void write_dataset(std::ostream& out, const std::vector<Scene>& scenes);
std::vector<Scene> read_dataset(std::istream& in, const std::string& what = "dataset");

void write_dataset(const std::string& path, const std::vector<Scene>& scenes);
std::vector<Scene> read_dataset(const std::string& path);

}  // namespace impgraph
