#include "akglue/base.hpp"

namespace akg {}
