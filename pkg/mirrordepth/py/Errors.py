'''
Exceptions raised by mirrordepth. Every class carries the process exit
code the command line uses when it stops on that error.
'''

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class MirrorDepthError(Exception):
    exitCode = 1


class ConfigError(MirrorDepthError):
    exitCode = EXIT_CONFIG


class DataError(MirrorDepthError):
    exitCode = EXIT_DATA


class ShapeError(DataError):
    '''
    Raised when tensor shapes disagree. The message names the
    offending dimension.
    '''
    pass


class NumericError(MirrorDepthError):
    '''
    Raised when a NaN or an infinity shows up in a tensor or a loss.
    ``step`` and ``breakdown`` are filled in by the trainer.
    '''
    exitCode = EXIT_NUMERIC

    def __init__(self, message, step=None, breakdown=None):
        MirrorDepthError.__init__(self, message)
        self.step = step
        self.breakdown = breakdown
