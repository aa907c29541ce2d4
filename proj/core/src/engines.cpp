#include "xledger/engines.hpp"

#include "xledger/podc18.hpp"
#include "xledger/vldb20.hpp"
#include "xledger/xlpn22.hpp"

namespace xledger {

std::unique_ptr<ProtocolEngine> make_engine(Protocol protocol, const World& world, const EngineOptions& options) {
    switch (protocol) {
        case Protocol::Xlpn22: return std::make_unique<Xlpn22Engine>(world, options);
        case Protocol::Vldb20: return std::make_unique<Vldb20Engine>(world, options);
        case Protocol::Podc18: return std::make_unique<Podc18Engine>(world, options);
    }
    throw std::invalid_argument("unknown protocol");
}

}  // namespace xledger
