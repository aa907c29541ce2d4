#pragma once

#include <memory>

#include "xledger/netsim.hpp"

namespace xledger {

/// The engine for `protocol`, bound to `world` (which must outlive it).
std::unique_ptr<ProtocolEngine> make_engine(Protocol protocol, const World& world, const EngineOptions& options = {});

}  // namespace xledger
