/**
 * Source checkpoint -> DFRW conversion.
 *
 * The source is a torchvision-convention VGG19 safetensors checkpoint
 * (keys `features.<i>.weight` / `features.<i>.bias`); any extra keys such
 * as classifier heads are ignored. Output is deterministic: the same
 * source always produces byte-identical DFRW files.
 */

import { readFile } from 'node:fs/promises';

import { DfrwManifest, DfrwTensor, IntegrityError, checksumOf, encodeDfrw } from './dfrw.js';
import { parseSafetensors } from './safetensors.js';
import {
  CONV_LAYERS,
  PREPROCESS_MEAN,
  PREPROCESS_STD,
  biasShape,
  kernelShape,
} from './vgg19.js';

export class NetworkError extends Error {}

function sameShape(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

/** Pull the 13 kernel/bias pairs out of a checkpoint, validating shapes. */
export function collectConvTensors(source: Map<string, { shape: number[]; data: Float32Array }>): DfrwTensor[] {
  const tensors: DfrwTensor[] = [];
  for (const layer of CONV_LAYERS) {
    const weightKey = `features.${layer.featureIndex}.weight`;
    const biasKey = `features.${layer.featureIndex}.bias`;
    const weight = source.get(weightKey);
    const bias = source.get(biasKey);
    if (!weight || !bias) {
      throw new IntegrityError(`source lacks ${weightKey} / ${biasKey} (${layer.name})`);
    }
    if (!sameShape(weight.shape, kernelShape(layer))) {
      throw new IntegrityError(
        `${layer.name}: kernel shape [${weight.shape}], expected [${kernelShape(layer)}]`,
      );
    }
    if (!sameShape(bias.shape, biasShape(layer))) {
      throw new IntegrityError(
        `${layer.name}: bias shape [${bias.shape}], expected [${biasShape(layer)}]`,
      );
    }
    tensors.push({ name: layer.name, shape: weight.shape, data: weight.data });
    tensors.push({ name: layer.name, shape: bias.shape, data: bias.data });
  }
  return tensors;
}

export function exportFromBuffer(sourceBytes: Buffer): Buffer {
  const tensors = collectConvTensors(parseSafetensors(sourceBytes));
  const manifest: DfrwManifest = {
    layers: CONV_LAYERS.map((l) => l.name),
    mean: PREPROCESS_MEAN,
    std: PREPROCESS_STD,
    source_checksum: checksumOf(tensors),
  };
  return encodeDfrw(manifest, tensors);
}

export async function loadSource(sourcePath?: string, url?: string): Promise<Buffer> {
  if (sourcePath) {
    return readFile(sourcePath);
  }
  if (!url) {
    throw new Error('no source given');
  }
  let response: Response;
  try {
    response = await fetch(url);
  } catch (err) {
    throw new NetworkError(`download failed for ${url}: ${err}`);
  }
  if (!response.ok) {
    throw new NetworkError(`download failed for ${url}: HTTP ${response.status}`);
  }
  return Buffer.from(await response.arrayBuffer());
}
