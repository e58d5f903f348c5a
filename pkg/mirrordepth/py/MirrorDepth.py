'''
Command line interface::

    mirrordepth gen-data --config run.json --count 32 --seed 0
    mirrordepth train --config run.json
    mirrordepth infer checkpoints/model_final.smck left.ppm --out pred [--pp]
    mirrordepth eval --pred pred --gt data --calib data/calib.json \\
                     --suite eigen --cap 50 --out results

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
abort (NaN or infinity during training).
'''

import os
import sys
import csv
import json
import glob
import time
import logging
import argparse
from dataclasses import asdict, fields

import numpy as np

from mirrordepth import __version__
from mirrordepth.py import Constants
from mirrordepth.py.Errors import (MirrorDepthError, ConfigError, DataError,
                                   EXIT_OK)
from mirrordepth.py.RunConfig import RunConfig
from mirrordepth.py.modeling.MDTensor import MDTensor
from mirrordepth.py.modeling.MDParameter import loadCheckpoint
from mirrordepth.py.imageops.ImageOps import resizeBilinear
from mirrordepth.py.network.DispNetLite import initParams, inferMono
from mirrordepth.py.stereo.SyntheticStereo import StereoSample, generateScene
from mirrordepth.py.training.AdamOptimizer import AdamState
from mirrordepth.py.training.Trainer import (Trainer, adamStatePath,
                                             FINAL_CHECKPOINT)
from mirrordepth.py.metrics.DepthMetrics import (CameraCalib, SUITES,
                                                 SUITE_FIELDS,
                                                 disparityToDepth, evaluate,
                                                 eigenCropMask,
                                                 centerCropMask,
                                                 aggregateMetrics)
from mirrordepth.py.postproc.MirrorBlend import inferWithPp
from mirrordepth.py.utils import pfmUtil

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.json'
CALIB = 'calib.json'
RUN_CONFIG = 'run.json'
METRICS_CSV = 'metrics.csv'
METRICS_JSON = 'metrics.json'
DISP_SUFFIX = '_disp.pfm'
LEFT_SUFFIX = '_left'


def _loadConfig(path):
    if path is None:
        return RunConfig().validate()
    return RunConfig.load(path)


def _makeDir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise DataError('cannot create %s: %s' % (path, e))


def _sampleStem(i):
    return 'sample_%04d' % i


def cmdGenData(args):
    cfg = _loadConfig(args.config)
    scene = cfg.scene
    if args.count < 1:
        raise ConfigError('--count must be >= 1')
    seed = cfg.train.seed if args.seed is None else args.seed
    out = args.out or cfg.paths.data_dir
    _makeDir(out)

    entries = []
    for i in range(args.count):
        sample = generateScene(seed + i, scene)
        stem = _sampleStem(i)
        entry = {'left': stem + LEFT_SUFFIX + '.ppm',
                 'right': stem + '_right.ppm',
                 'disparity': stem + DISP_SUFFIX,
                 'seed': seed + i}
        pfmUtil.writePpm(os.path.join(out, entry['left']),
                         sample.left.values)
        pfmUtil.writePpm(os.path.join(out, entry['right']),
                         sample.right.values)
        dispPath = os.path.join(out, entry['disparity'])
        pfmUtil.writePfm(dispPath, sample.gt_disparity.values)
        pfmUtil.writeSidecar(dispPath,
                             d_max=max(scene.disparity_px) / scene.width,
                             seed=seed + i,
                             disparity_px=list(sample.disparity_px),
                             calib=asdict(sample.calib))
        if sample.occlusion is not None:
            entry['occlusion'] = stem + '_occ.pfm'
            pfmUtil.writePfm(os.path.join(out, entry['occlusion']),
                             sample.occlusion)
        entries.append(entry)

    with open(os.path.join(out, CALIB), 'w') as f:
        json.dump(asdict(scene.calib), f, indent=2, sort_keys=True)
        f.write('\n')
    manifest = {'count': args.count, 'seed': seed, 'scene': asdict(scene),
                'samples': entries}
    with open(os.path.join(out, MANIFEST), 'w') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info('wrote %d %s samples to %s', args.count, scene.mode, out)
    return EXIT_OK


def loadDataset(dataDir, dtype):
    '''
    Read the samples listed in ``dataDir/manifest.json``, in manifest
    order.
    '''
    path = os.path.join(dataDir, MANIFEST)
    try:
        with open(path) as f:
            manifest = json.load(f)
    except (IOError, OSError, ValueError) as e:
        raise DataError('cannot read dataset manifest %s: %s' % (path, e))
    try:
        scene = manifest['scene']
        calib = CameraCalib(scene['focal_px'], scene['baseline_m'])
        entries = manifest['samples']
    except (KeyError, TypeError) as e:
        raise DataError('%s: malformed manifest (%s)' % (path, e))
    dataset = []
    for e in entries:
        left = pfmUtil.readPpm(os.path.join(dataDir, e['left']))
        right = pfmUtil.readPpm(os.path.join(dataDir, e['right']))
        gt = pfmUtil.readPfm(os.path.join(dataDir, e['disparity']))
        dataset.append(StereoSample(
            left=MDTensor(left[None].astype(dtype)),
            right=MDTensor(right[None].astype(dtype)),
            gt_disparity=MDTensor(gt[None, None].astype(dtype)),
            calib=calib, seed=e.get('seed')))
    if not dataset:
        raise DataError('%s lists no samples' % path)
    return dataset


def cmdTrain(args):
    cfg = _loadConfig(args.config)
    tc = cfg.train
    dtype = tc.numpyDtype
    dataset = loadDataset(cfg.paths.data_dir, dtype)
    shape = dataset[0].left.shape
    tc.spec.checkImageSize(shape[2], shape[3])

    params, state = None, None
    if args.resume:
        reference = initParams(tc.spec, tc.seed, dtype)
        params = loadCheckpoint(args.resume, reference)
        state = AdamState.load(adamStatePath(args.resume))
        logger.info('resuming from %s at step %d', args.resume, state.t)

    out = cfg.paths.checkpoint_dir
    _makeDir(out)
    cfg.save(os.path.join(out, RUN_CONFIG))
    Trainer(dataset, tc, params=params, state=state, outDir=out).run()
    logger.info('final checkpoint %s', os.path.join(out, FINAL_CHECKPOINT))
    return EXIT_OK


def _loadImage(path, dtype):
    return MDTensor(pfmUtil.readPpm(path)[None].astype(dtype))


def cmdInfer(args):
    configPath = args.config or os.path.join(
        os.path.dirname(os.path.abspath(args.checkpoint)), RUN_CONFIG)
    if not os.path.exists(configPath):
        raise ConfigError('no run config at %s (use --config)' % configPath)
    cfg = _loadConfig(configPath)
    spec = cfg.train.spec
    # names and shapes only; the values come from the checkpoint
    params = loadCheckpoint(args.checkpoint, initParams(spec, 0))
    images = []
    for path in args.images:
        image = _loadImage(path, params.dtype)
        try:
            spec.checkImageSize(image.shape[2], image.shape[3])
        except ConfigError as e:
            raise ConfigError('%s: %s' % (path, e))
        images.append(image)
    _makeDir(args.out)

    for path, image in zip(args.images, images):
        tic = time.time()
        if args.pp:
            d = inferWithPp(params, image, spec, cfg.blend)
        else:
            d = inferMono(params, image, spec)[0]
        stem = os.path.splitext(os.path.basename(path))[0]
        outPath = os.path.join(args.out, stem + DISP_SUFFIX)
        pfmUtil.writePfm(outPath, d.values)
        pfmUtil.writeSidecar(outPath, d_max=spec.d_max,
                             source=os.path.basename(path),
                             post_processing=bool(args.pp))
        logger.info('%s -> %s (%.3fs%s)', path, outPath, time.time() - tic,
                    ', post-processed' if args.pp else '')
    return EXIT_OK


def _readCalib(path):
    try:
        with open(path) as f:
            d = json.load(f)
    except (IOError, OSError, ValueError) as e:
        raise DataError('cannot read calibration %s: %s' % (path, e))
    known = set(f.name for f in fields(CameraCalib))
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError('%s: unknown calibration key(s): %s'
                          % (path, ', '.join(unknown)))
    return CameraCalib(**d).validate()


def _disparityFiles(folder):
    files = sorted(glob.glob(os.path.join(folder, '*' + DISP_SUFFIX)))
    if not files:
        raise DataError('no *%s files in %s' % (DISP_SUFFIX, folder))
    return files


def _byStem(files):
    '''
    Map each disparity file to its sample stem: ``sample_0003_disp.pfm``
    and ``sample_0003_left_disp.pfm`` both belong to ``sample_0003``.
    '''
    ret = {}
    for path in files:
        stem = os.path.basename(path)[:-len(DISP_SUFFIX)]
        if stem.endswith(LEFT_SUFFIX):
            stem = stem[:-len(LEFT_SUFFIX)]
        if stem in ret:
            raise DataError('%s and %s are both disparities of %s'
                            % (ret[stem], path, stem))
        ret[stem] = path
    return ret


def _format(v):
    return repr(float(v))


def cmdEval(args):
    if args.suite not in SUITES:
        raise ConfigError('unknown suite %s' % args.suite)
    if args.cap is not None and not args.cap > 0:
        raise ConfigError('--cap must be > 0')
    calib = _readCalib(args.calib)
    preds = _byStem(_disparityFiles(args.pred))
    gts = _byStem(_disparityFiles(args.gt))
    if set(preds) != set(gts):
        raise DataError(
            'predictions and ground truth cover different samples '
            '(only predicted: %s; only ground truth: %s)'
            % (', '.join(sorted(set(preds) - set(gts))) or '-',
               ', '.join(sorted(set(gts) - set(preds))) or '-'))

    rows = []
    names = []
    for stem in sorted(preds):
        predPath, gtPath = preds[stem], gts[stem]
        pfmUtil.readSidecar(predPath)
        pfmUtil.readSidecar(gtPath)
        gt = pfmUtil.readPfm(gtPath).astype(np.float64)
        pred = pfmUtil.readPfm(predPath).astype(np.float64)
        H, W = gt.shape
        if pred.shape != gt.shape:
            pred = resizeBilinear(pred, H, W)
        mask = gt > 0
        if args.eigen_crop:
            mask &= eigenCropMask(H, W)
        if args.center_crop_aspect:
            mask &= centerCropMask(H, W, args.center_crop_aspect)
        gtDepth = disparityToDepth(gt, calib, W, mask)
        predDepth = disparityToDepth(pred, calib, W, mask)
        rows.append(evaluate(predDepth, gtDepth, args.suite, mask, args.cap))
        names.append(os.path.basename(predPath))
    mean = aggregateMetrics(rows)

    columns = list(SUITE_FIELDS[args.suite])
    _makeDir(args.out)
    with open(os.path.join(args.out, METRICS_CSV), 'w', newline='') as f:
        w = csv.writer(f)
        w.writerow(['image'] + columns)
        for name, r in zip(names, rows):
            v = r.values()
            w.writerow([name] + [_format(v[c]) for c in columns])
        v = mean.values()
        w.writerow(['mean'] + [_format(v[c]) for c in columns])
    summary = {'suite': args.suite, 'cap': args.cap,
               'depth_units': Constants.DEPTH_UNITS,
               'eigen_crop': bool(args.eigen_crop),
               'center_crop_aspect': args.center_crop_aspect,
               'count': len(rows),
               'mean': dict((c, float(mean.values()[c])) for c in columns),
               'images': [dict([('image', n)] +
                               [(c, float(r.values()[c])) for c in columns])
                          for n, r in zip(names, rows)]}
    with open(os.path.join(args.out, METRICS_JSON), 'w') as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info('%s over %d images: %s', args.suite, len(rows),
                ', '.join('%s=%.4f' % (c, mean.values()[c])
                          for c in columns))
    return EXIT_OK


def buildParser():
    parser = argparse.ArgumentParser(
        prog='mirrordepth',
        description='Self-supervised monocular depth from stereo pairs '
                    'with a mirrored Siamese network.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='log debug messages')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('gen-data', help='generate a synthetic stereo dataset')
    p.add_argument('--config', help='run config JSON (defaults built in)')
    p.add_argument('--count', type=int, required=True,
                   help='number of samples')
    p.add_argument('--seed', type=int,
                   help='seed of the first sample (default: config seed); '
                        'sample i uses seed + i')
    p.add_argument('--out', help='output directory (default: data_dir)')
    p.set_defaults(func=cmdGenData)

    p = sub.add_parser('train', help='train on a generated dataset')
    p.add_argument('--config', required=True, help='run config JSON')
    p.add_argument('--resume', metavar='CHECKPOINT',
                   help='continue from a checkpoint; its optimizer state '
                        'is read from the same directory')
    p.set_defaults(func=cmdTrain)

    p = sub.add_parser('infer', help='predict disparity maps (PFM)')
    p.add_argument('checkpoint', help='model checkpoint (.smck)')
    p.add_argument('images', nargs='+', help='input PPM images')
    p.add_argument('--out', required=True, help='output directory')
    p.add_argument('--pp', action='store_true',
                   help='blend with the prediction of the mirrored image')
    p.add_argument('--config',
                   help='run config (default: run.json beside the '
                        'checkpoint)')
    p.set_defaults(func=cmdInfer)

    p = sub.add_parser(
        'eval', help='compare predicted and ground-truth disparities',
        description='Writes metrics.csv (columns: image, then the suite '
                    'metrics in order: eigen = abs_rel sq_rel rmse '
                    'rmse_log delta1 delta2 delta3; silog = silog '
                    'sq_rel_pct abs_rel_pct irmse; make3d = make3d_sq_rel '
                    'make3d_abs_rel make3d_rmse make3d_log10; last row '
                    '"mean") and metrics.json.')
    p.add_argument('--pred', required=True,
                   help='directory of predicted *_disp.pfm files')
    p.add_argument('--gt', required=True,
                   help='directory of ground-truth *_disp.pfm files')
    p.add_argument('--calib', required=True,
                   help='JSON with focal_px and baseline_m')
    p.add_argument('--suite', choices=SUITES, default='eigen')
    p.add_argument('--cap', type=float,
                   help='clamp depths to this many meters (eigen suite)')
    p.add_argument('--eigen-crop', action='store_true',
                   help='evaluate inside the standard KITTI crop')
    p.add_argument('--center-crop-aspect', type=float,
                   help='evaluate inside a central crop of this '
                        'width/height ratio')
    p.add_argument('--out', required=True, help='output directory')
    p.set_defaults(func=cmdEval)
    return parser


def main(argv=None):
    args = buildParser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    try:
        return args.func(args)
    except MirrorDepthError as e:
        logger.error('%s', e)
        return e.exitCode


if __name__ == '__main__':
    sys.exit(main())
