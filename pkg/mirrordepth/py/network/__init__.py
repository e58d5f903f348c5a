from mirrordepth.py.network.DispNetLite import NetworkSpec, SiameseOutput
from mirrordepth.py.network.DispNetLite import initParams, countParameters
from mirrordepth.py.network.DispNetLite import forwardSingle, forwardSiamese
from mirrordepth.py.network.DispNetLite import inferMono
