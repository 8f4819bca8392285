#pragma once

#include "blocktrace/facade.hpp"

#include "httplib.h"

namespace blocktrace::facade {

/// Registers the REST endpoints of `service` on `server`. Errors are
/// answered as {"error": message} with the status from status_for.
void mount(httplib::Server& server, Service& service);

}  // namespace blocktrace::facade
