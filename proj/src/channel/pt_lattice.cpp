#include "ptforge/channel/pt_lattice.hpp"

#include "ptforge/error.hpp"

namespace ptforge::channel {

PtLattice::PtLattice(fst::Wfst fst, bool allow_empty) : fst_(std::move(fst)) {
  if (!fst_.IsAcceptor()) throw ContractError("PtLattice: machine is not an acceptor");
  if (!fst::SameTable(fst_.InputSymbols(), fst_.OutputSymbols()))
    throw ContractError("PtLattice: input and output tables differ");
  fst_.Validate();
  if (fst_.Empty() && !allow_empty) throw EmptyLatticeError("PtLattice: empty lattice");
}

}  // namespace ptforge::channel
