import importlib.util

# the engine suite must run standalone: collect the bridge's tests only
# when the bridge package is actually installed
collect_ignore_glob = []
if importlib.util.find_spec("gaussnav_bridge") is None:
    collect_ignore_glob.append("bridge/*")
