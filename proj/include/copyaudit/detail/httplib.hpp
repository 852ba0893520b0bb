// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// httplib pulls in <resolv.h>, whose `_res` macro breaks Eigen headers
// parsed afterwards. Eigen must be seen first.
#include <Eigen/Core>

#include "httplib.h"
