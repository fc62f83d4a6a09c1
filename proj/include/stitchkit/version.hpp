#pragma once

#define STITCHKIT_VERSION "0.1.0"
