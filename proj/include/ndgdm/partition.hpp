#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ndgdm/mesh.hpp"

namespace ndgdm {

/// Nonoverlapping decomposition of the mesh into subdomains plus the nested
/// agglomerated coarse mesh. Every element belongs to exactly one subdomain
/// and one agglomerate; agglomerates never cross subdomain boundaries.
struct Partition {
  std::vector<int> subdomain_of;
  std::vector<int> agglomerate_of;
  int n_subdomains = 0;
  int n_coarse = 0;
  std::vector<std::vector<int>> adjacency;  ///< per subdomain, sorted neighbor ids
  int max_neighbors = 0;                    ///< N_S
};

/// Recursive coordinate bisection of the element centroids. With
/// `respect_materials` every edge-connected single-material component is
/// split separately (parts apportioned by component size), so each
/// subdomain is single-material. The seed only breaks centroid ties.
std::vector<int> partition_mesh(const Mesh& mesh, int n_parts, bool respect_materials,
                                unsigned seed);

/// Splits every subdomain into `parts_per_subdomain` edge-connected pieces;
/// 1 reproduces the subdomain map. Coarse ids are numbered subdomain-major.
std::vector<int> agglomerate_coarse(const Mesh& mesh, const std::vector<int>& subdomain_of,
                                    int parts_per_subdomain, unsigned seed = 0);

/// Subdomains are adjacent iff they share an interior face. Returns the
/// sorted adjacency lists and the maximum degree.
std::pair<std::vector<std::vector<int>>, int> subdomain_adjacency(
    const Mesh& mesh, const std::vector<int>& subdomain_of);

/// Bundles the partition pipeline and validates the nesting invariants.
Partition make_partition(const Mesh& mesh, int n_subdomains, int parts_per_subdomain,
                         bool respect_materials, unsigned seed);

/// One `subdomain agglomerate` pair per element, one line per element.
void save_partition(const Partition& partition, const std::string& path);

}  // namespace ndgdm
