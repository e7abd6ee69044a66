#pragma once

#define TENTLAB_VERSION "0.1.0"
