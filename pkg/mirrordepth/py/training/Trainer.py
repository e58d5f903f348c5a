'''
The training loop: batch assembly, augmentation, Siamese forward pass,
pyramid loss, backward pass and Adam update.

Every step draws its randomness from ``numpy.random.default_rng([seed,
step])``, and batches are a function of the step number alone, so a run
resumed from a checkpoint and its optimizer state repeats the
uninterrupted run exactly.

**Usage**

>>> from mirrordepth.py.training.Trainer import lossColumns
>>> lossColumns(1)
['step', 'L_total', 's1_im_l', 's1_im_r', 's1_tv_l', 's1_tv_r', 's1_lr_l', 's1_lr_r']

'''

import os
import csv
import time
import logging
from dataclasses import dataclass, field

import numpy as np

from mirrordepth.py import Constants
from mirrordepth.py.Errors import ConfigError, DataError, NumericError
from mirrordepth.py.modeling.MDTensor import MDTensor, ComputationRecord
from mirrordepth.py.modeling.MDParameter import saveCheckpoint
from mirrordepth.py.losses.PhotometricLoss import (LossWeights, pyramidLoss,
                                                   lossReport, TERMS)
from mirrordepth.py.network.DispNetLite import (NetworkSpec, initParams,
                                                forwardSiamese)
from mirrordepth.py.training.AdamOptimizer import (AdamConfig, AdamState,
                                                   adamStep)
from mirrordepth.py.training.Augmentation import AugmentConfig, augment

logger = logging.getLogger(__name__)

FINAL_CHECKPOINT = 'model_final.smck'
ADAM_STATE = 'adam_state.smck'
LOSS_TRACE = 'loss.csv'


@dataclass
class TrainConfig:
    batch_size: int = 8
    steps: int = 2000
    seed: int = 0
    shuffle: bool = False
    checkpoint_every: int = 0
    log_every: int = 50
    dtype: str = 'float32'
    single_scale_loss: bool = False
    weights: LossWeights = field(default_factory=LossWeights)
    spec: NetworkSpec = field(default_factory=NetworkSpec)
    adam: AdamConfig = field(default_factory=AdamConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)

    @property
    def numpyDtype(self):
        return np.dtype(Constants.DATATYPES[self.dtype])

    def validate(self):
        if self.batch_size < 1:
            raise ConfigError('batch_size must be >= 1')
        if self.steps < 1:
            raise ConfigError('steps must be >= 1')
        if self.checkpoint_every < 0 or self.log_every < 0:
            raise ConfigError('checkpoint_every and log_every must be >= 0')
        if self.dtype not in Constants.DATATYPES:
            raise ConfigError('dtype must be one of %s, got %r'
                              % (', '.join(Constants.DATATYPES), self.dtype))
        for sub in (self.weights, self.spec, self.adam, self.augment):
            sub.validate()
        return self


def adamStatePath(checkpoint):
    '''
    Optimizer state saved next to ``checkpoint``: ``adam_state.smck`` for
    the final checkpoint, ``adam_step<N>.smck`` for ``model_step<N>.smck``.
    '''
    folder, name = os.path.split(checkpoint)
    if name == FINAL_CHECKPOINT:
        return os.path.join(folder, ADAM_STATE)
    if name.startswith('model_'):
        return os.path.join(folder, 'adam_' + name[len('model_'):])
    return os.path.join(folder, ADAM_STATE)


def lossColumns(scales):
    cols = ['step', 'L_total']
    for s in range(1, scales + 1):
        for term in TERMS:
            for side in ('l', 'r'):
                cols.append('s%d_%s_%s' % (s, term, side))
    return cols


def lossRow(step, total, breakdowns):
    row = [step, total]
    for b in breakdowns:
        terms = b.terms()
        for term in TERMS:
            for side in ('l', 'r'):
                row.append(terms['%s_%s' % (term, side)])
    return row


def _formatRow(row):
    return [row[0]] + [repr(float(v)) for v in row[1:]]


class Trainer(object):
    '''
    Train a :class:`ParameterSet` on a list of
    :class:`~mirrordepth.py.stereo.SyntheticStereo.StereoSample`.

    ``params`` and ``state`` resume an earlier run; by default the network
    is initialized from ``cfg.seed``. When ``outDir`` is given the loss
    trace, the periodic checkpoints and the final checkpoint are written
    there.
    '''

    def __init__(self, dataset, cfg, params=None, state=None, outDir=None):
        self.dataset = list(dataset)
        if not self.dataset:
            raise DataError('training needs a non-empty dataset')
        self.cfg = cfg.validate()
        self.dtype = cfg.numpyDtype
        self._checkDataset()
        if params is None:
            params = initParams(cfg.spec, cfg.seed, self.dtype)
        self.params = params
        self.state = state if state is not None else AdamState.fresh(params)
        self.state.checkShapes(params)
        self.outDir = outDir
        self.trace = []
        self._permutations = {}

    def _checkDataset(self):
        shape = self.dataset[0].left.shape
        for i, s in enumerate(self.dataset):
            if s.left.shape != shape or s.right.shape != shape:
                raise DataError('sample %d has shape %s, expected %s'
                                % (i, s.left.shape, shape))
        self.cfg.spec.checkImageSize(shape[2], shape[3])

    def _permutation(self, epoch):
        p = self._permutations.get(epoch)
        if p is None:
            rng = np.random.default_rng([self.cfg.seed, epoch, 1])
            p = self._permutations[epoch] = rng.permutation(len(self.dataset))
        return p

    def batchIndices(self, step):
        '''
        Dataset indices of the batch of 0-based ``step``: sequential with
        wrap-around, or a seeded per-epoch permutation with ``shuffle``.
        '''
        n = len(self.dataset)
        bs = self.cfg.batch_size
        ret = []
        for pos in range(step * bs, (step + 1) * bs):
            if self.cfg.shuffle:
                ret.append(int(self._permutation(pos // n)[pos % n]))
            else:
                ret.append(pos % n)
        return ret

    def assembleBatch(self, step, rng):
        left, right = [], []
        for i in self.batchIndices(step):
            s = augment(self.dataset[i], rng, self.cfg.augment)
            left.append(s.left.values)
            right.append(s.right.values)
        return (MDTensor(np.concatenate(left).astype(self.dtype)),
                MDTensor(np.concatenate(right).astype(self.dtype)))

    def lossAndGradients(self, I_l, I_r):
        'Forward and backward pass on one batch'
        record = ComputationRecord()
        output = forwardSiamese(self.params, I_l, I_r, self.cfg.spec, record)
        total, breakdowns = pyramidLoss(I_l, I_r, output, self.cfg.weights,
                                        self.cfg.single_scale_loss)
        grads = record.backward(total).parameters()
        return total.item(), breakdowns, grads

    def diagnose(self, I_l, I_r):
        '''
        Locate a non-finite loss: returns ``(values, failed)`` as
        :func:`~mirrordepth.py.losses.PhotometricLoss.lossReport` does.
        When the network itself overflows no term can be evaluated and
        ``failed`` is ``['network']``.
        '''
        try:
            output = forwardSiamese(self.params, I_l, I_r, self.cfg.spec,
                                    ComputationRecord())
        except NumericError:
            values = dict((c, float('nan'))
                          for c in lossColumns(self.cfg.spec.scales)[1:])
            return values, ['network']
        return lossReport(I_l, I_r, output, self.cfg.weights)

    def step(self, step):
        '''
        Run 0-based ``step``. Returns the loss trace row (1-based step
        number).
        '''
        rng = np.random.default_rng([self.cfg.seed, step])
        I_l, I_r = self.assembleBatch(step, rng)
        try:
            total, breakdowns, grads = self.lossAndGradients(I_l, I_r)
        except NumericError as e:
            values, failed = self.diagnose(I_l, I_r)
            where = ', '.join(failed) or 'gradient'
            raise NumericError('step %d: non-finite %s (%s)'
                               % (step + 1, where, e),
                               step=step + 1, breakdown=values)
        row = lossRow(step + 1, total, breakdowns)
        problem = None
        if not np.isfinite(total):
            problem = 'non-finite loss %r' % total
        else:
            for name, g in grads.items():
                if not np.isfinite(g).all():
                    problem = 'non-finite gradient for %s' % name
                    break
        if problem is not None:
            values = dict(zip(lossColumns(self.cfg.spec.scales)[1:],
                              (float(v) for v in row[1:])))
            raise NumericError('step %d: %s' % (step + 1, problem),
                               step=step + 1, breakdown=values)
        adamStep(self.params, grads, self.state, self.cfg.adam)
        return row

    def _writeRow(self, row, header):
        path = os.path.join(self.outDir, LOSS_TRACE)
        mode = 'w' if header else 'a'
        with open(path, mode, newline='') as f:
            w = csv.writer(f)
            if header:
                w.writerow(lossColumns(self.cfg.spec.scales))
            w.writerow(_formatRow(row))

    def _truncateTrace(self, step):
        'Drop the trace rows after ``step``; a resumed run rewrites them'
        path = os.path.join(self.outDir, LOSS_TRACE)
        with open(path, newline='') as f:
            rows = list(csv.reader(f))
        if not rows or rows[0] != lossColumns(self.cfg.spec.scales):
            raise DataError('%s does not match the loss trace columns' % path)
        try:
            kept = [r for r in rows[1:] if int(r[0]) <= step]
        except (ValueError, IndexError):
            raise DataError('%s: malformed loss trace row' % path)
        if len(kept) < len(rows) - 1:
            logger.info('dropping %d trace rows after step %d',
                        len(rows) - 1 - len(kept), step)
        with open(path, 'w', newline='') as f:
            w = csv.writer(f)
            w.writerow(rows[0])
            w.writerows(kept)

    def saveCheckpoint(self, name):
        path = os.path.join(self.outDir, name)
        saveCheckpoint(path, self.params)
        self.state.save(adamStatePath(path))
        logger.debug('saved %s at step %d', path, self.state.t)

    def run(self):
        '''
        Train from step ``state.t`` up to ``cfg.steps``. Returns the
        parameters and the loss trace rows of this run.
        '''
        cfg = self.cfg
        start = self.state.t
        if start >= cfg.steps:
            logger.info('nothing to do: already at step %d of %d',
                        start, cfg.steps)
        else:
            logger.info('training steps %d..%d, batch %d, %d samples',
                        start + 1, cfg.steps, cfg.batch_size,
                        len(self.dataset))
        newTrace = self.outDir is not None and (
            start == 0 or
            not os.path.exists(os.path.join(self.outDir, LOSS_TRACE)))
        if self.outDir is not None and not newTrace:
            self._truncateTrace(start)
        tic = time.time()
        for step in range(start, cfg.steps):
            row = self.step(step)
            self.trace.append(row)
            if self.outDir is not None:
                self._writeRow(row, header=(newTrace and step == start))
                if cfg.checkpoint_every and \
                        (step + 1) % cfg.checkpoint_every == 0:
                    self.saveCheckpoint('model_step%06d.smck' % (step + 1))
            if cfg.log_every and (step + 1) % cfg.log_every == 0:
                logger.info('step %d/%d  loss %.6f  %.1fs', step + 1,
                            cfg.steps, row[1], time.time() - tic)
        if self.outDir is not None:
            self.saveCheckpoint(FINAL_CHECKPOINT)
        return self.params, self.trace


def train(dataset, cfg, outDir=None):
    'Train a fresh network; returns ``(params, trace)``'
    return Trainer(dataset, cfg, outDir=outDir).run()
