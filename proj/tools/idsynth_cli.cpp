#include <idsynth/idsynth.h>

#include <cstdio>

int main() {
    std::printf("idsynth %s\n", ids_version());
    return 0;
}
