#!/usr/bin/env node
/**
 * Generates a synthetic VGG19 safetensors checkpoint for offline testing:
 * canonical layer names and shapes, seeded He-scaled random values.
 *
 * Usage: make-fixture --out fixture.safetensors [--seed 0]
 */

import { writeFile } from 'node:fs/promises';

import { writeSafetensors } from './safetensors.js';
import { CONV_LAYERS, biasShape, kernelShape } from './vgg19.js';

/** splitmix64: tiny, seedable, good enough for fixture noise. */
function splitmix64(seed: bigint): () => number {
  let state = seed;
  return () => {
    state = (state + 0x9e3779b97f4a7c15n) & 0xffffffffffffffffn;
    let z = state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & 0xffffffffffffffffn;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & 0xffffffffffffffffn;
    z = z ^ (z >> 31n);
    return Number(z >> 11n) / 2 ** 53; // uniform in [0, 1)
  };
}

function gaussianFill(data: Float32Array, std: number, next: () => number): void {
  for (let i = 0; i < data.length; i += 2) {
    const u = Math.max(next(), Number.MIN_VALUE);
    const v = next();
    const r = Math.sqrt(-2 * Math.log(u)) * std;
    data[i] = r * Math.cos(2 * Math.PI * v);
    if (i + 1 < data.length) data[i + 1] = r * Math.sin(2 * Math.PI * v);
  }
}

export function makeFixture(seed: number): Buffer {
  const next = splitmix64(BigInt(seed));
  const tensors: { name: string; shape: number[]; data: Float32Array }[] = [];
  for (const layer of CONV_LAYERS) {
    const kshape = kernelShape(layer);
    const kernel = new Float32Array(kshape.reduce((a, b) => a * b, 1));
    gaussianFill(kernel, Math.sqrt(2 / (layer.inChannels * 9)), next);
    const bias = new Float32Array(biasShape(layer)[0]);
    tensors.push({ name: `features.${layer.featureIndex}.weight`, shape: kshape, data: kernel });
    tensors.push({ name: `features.${layer.featureIndex}.bias`, shape: biasShape(layer), data: bias });
  }
  return writeSafetensors(tensors);
}

async function main(argv: string[]): Promise<number> {
  let out = '';
  let seed = 0;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === '--out') out = argv[++i];
    else if (argv[i] === '--seed') seed = Number(argv[++i]);
    else {
      console.error(`unknown argument ${argv[i]}`);
      return 1;
    }
  }
  if (!out) {
    console.error('usage: make-fixture --out <file.safetensors> [--seed N]');
    return 1;
  }
  const bytes = makeFixture(seed);
  await writeFile(out, bytes);
  console.log(`wrote ${out} (${bytes.length} bytes)`);
  return 0;
}

const invokedDirectly =
  process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop() ?? '');
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
