#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "vbpi/mixture.hpp"
#include "vbpi/optimizer.hpp"

namespace vbpi {

struct Checkpoint {
  MixtureApprox model;
  std::optional<TrainerState> state;
};

// Line-oriented text; numbers with 17 significant digits so a load restores every
// value exactly.
void SaveCheckpoint(std::ostream& out, const MixtureApprox& model,
                    const TrainerState* state = nullptr);
// Writes to a temporary file and renames it over `path`.
void SaveCheckpointFile(const std::string& path, const MixtureApprox& model,
                        const TrainerState* state = nullptr);

// Throws kIncompatibleCheckpoint on a version mismatch or, when `expected_taxa` is
// given, on any difference in taxon names or order.
Checkpoint LoadCheckpoint(std::istream& in, const TaxonSet* expected_taxa = nullptr);
Checkpoint LoadCheckpointFile(const std::string& path, const TaxonSet* expected_taxa = nullptr);

}  // namespace vbpi
