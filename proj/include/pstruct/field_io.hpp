#pragma once

// Field serialization. Binary layout: "PSF1", uint8 kind, uint32 n,
// uint32 components, then little-endian doubles with the components of a
// node adjacent and nodes ordered x fastest. The CSV variant carries the
// same header on its first line.

#include <filesystem>

#include "pstruct/grid.hpp"

namespace pstruct::grid {

template <std::size_t N>
void write_field_binary(const std::filesystem::path& path, const NodalField<N>& f);
template <std::size_t N>
NodalField<N> read_field_binary(const std::filesystem::path& path);

template <std::size_t N>
void write_field_csv(const std::filesystem::path& path, const NodalField<N>& f);
template <std::size_t N>
NodalField<N> read_field_csv(const std::filesystem::path& path);

}  // namespace pstruct::grid
