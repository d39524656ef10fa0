#pragma once

#define FRACFORM_VERSION_MAJOR 0
#define FRACFORM_VERSION_MINOR 1
#define FRACFORM_VERSION_PATCH 0
#define FRACFORM_VERSION "0.1.0"
