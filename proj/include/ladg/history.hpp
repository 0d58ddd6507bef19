#pragma once

#include <vector>

#include "ladg/mesh.hpp"

namespace ladg {

/// Which correction pass last rewrote each element. Element labels partition
/// the domain; label j means the element was last solved over in pass j.
/// Faces between different labels form the skeleton where the composed
/// fluxes may jump.
struct SubdomainHistory {
  int k = 1;
  std::vector<int> label;  // per element of the current mesh
  std::vector<int> omega;  // element ids of the current (latest) subdomain
};

inline SubdomainHistory init_history(const Mesh& m) {
  SubdomainHistory h;
  h.k = 1;
  h.label.assign(m.n_elements(), 1);
  h.omega.resize(m.n_elements());
  for (int e = 0; e < m.n_elements(); ++e) h.omega[e] = e;
  return h;
}

/// Advances the history across one refine + subdomain step. Labels are
/// inherited through the refinement relation, then every element of the new
/// subdomain is stamped with the new pass index.
inline SubdomainHistory update_history(const SubdomainHistory& prev,
                                       const RefinementRelation& rel,
                                       const Mesh& new_mesh,
                                       const std::vector<int>& omega_new) {
  SubdomainHistory h;
  h.k = prev.k + 1;
  h.label.assign(new_mesh.n_elements(), 0);
  for (size_t pe = 0; pe < rel.children.size(); ++pe)
    for (int c : rel.children[pe]) h.label[c] = prev.label[pe];
  for (int e : omega_new) {
    LADG_REQUIRE(e >= 0 && e < new_mesh.n_elements(), "update_history: bad id");
    h.label[e] = h.k;
  }
  h.omega = omega_new;
  return h;
}

inline std::vector<uint8_t> skeleton_faces(const Mesh& m,
                                           const SubdomainHistory& h) {
  std::vector<uint8_t> sk(m.n_faces(), 0);
  for (int f = 0; f < m.n_faces(); ++f) {
    const auto& fc = m.faces[f];
    if (fc.neighbor >= 0 && h.label[fc.owner] != h.label[fc.neighbor])
      sk[f] = 1;
  }
  return sk;
}

inline std::vector<uint8_t> subdomain_mask(const Mesh& m,
                                           const std::vector<int>& subset) {
  std::vector<uint8_t> mask(m.n_elements(), 0);
  for (int e : subset) mask[e] = 1;
  return mask;
}

}  // namespace ladg
