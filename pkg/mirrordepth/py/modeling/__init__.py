from mirrordepth.py.modeling.MDTensor import MDTensor
from mirrordepth.py.modeling.MDTensor import ComputationRecord
from mirrordepth.py.modeling.MDTensor import GradientMap
from mirrordepth.py.modeling.MDTensor import elementwise, reduce
from mirrordepth.py.modeling.MDTensor import concatChannels, spatialSlice
from mirrordepth.py.modeling.MDConv import conv2d
from mirrordepth.py.modeling.MDParameter import Parameter, ParameterSet
