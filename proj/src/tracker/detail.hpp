#pragma once

#include "blocktrace/tracker.hpp"

namespace blocktrace::tracker {

/// Change with its default sentence; `extra` is the sentence for kinds without one.
Change describe(ChangeType type, const std::string& block, const std::string& extra = {});

}  // namespace blocktrace::tracker
