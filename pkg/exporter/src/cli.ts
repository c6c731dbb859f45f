#!/usr/bin/env node
/**
 * export-vgg19: serialize pretrained VGG19 conv weights into a DFRW file.
 *
 * Usage:
 *   export-vgg19 --out weights.dfrw [--source model.safetensors] [--url <url>]
 *   export-vgg19 --verify weights.dfrw
 *   export-vgg19 --inspect weights.dfrw
 *
 * Without --source the checkpoint is downloaded from the public model zoo
 * (torchvision's ImageNet VGG19, safetensors mirror). Exit codes:
 * 0 success, 1 usage error, 2 network error, 3 integrity/format error.
 */

import { readFile, writeFile } from 'node:fs/promises';

import { IntegrityError, decodeDfrw, verifyDfrw } from './dfrw.js';
import { NetworkError, exportFromBuffer, loadSource } from './export.js';
import { SafetensorsError } from './safetensors.js';
import { DEFAULT_SOURCE_URL } from './vgg19.js';

interface Args {
  out?: string;
  source?: string;
  url: string;
  verify?: string;
  inspect?: string;
  help?: boolean;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { url: DEFAULT_SOURCE_URL };
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case '--out':
      case '-o':
        args.out = argv[++i];
        break;
      case '--source':
      case '-s':
        args.source = argv[++i];
        break;
      case '--url':
        args.url = argv[++i];
        break;
      case '--verify':
        args.verify = argv[++i];
        break;
      case '--inspect':
        args.inspect = argv[++i];
        break;
      case '--help':
      case '-h':
        args.help = true;
        break;
      default:
        throw new UsageError(`unknown argument ${argv[i]}`);
    }
  }
  return args;
}

class UsageError extends Error {}

const USAGE = `usage:
  export-vgg19 --out <file.dfrw> [--source <model.safetensors>] [--url <url>]
  export-vgg19 --verify <file.dfrw>
  export-vgg19 --inspect <file.dfrw>`;

export async function run(argv: string[]): Promise<number> {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    return 1;
  }
  if (args.help) {
    console.log(USAGE);
    return 0;
  }
  try {
    if (args.verify) {
      const manifest = verifyDfrw(await readFile(args.verify));
      console.log(`OK: ${args.verify} (${manifest.layers.length} layers, ${manifest.source_checksum})`);
      return 0;
    }
    if (args.inspect) {
      const { manifest } = decodeDfrw(await readFile(args.inspect));
      console.log(JSON.stringify(manifest, null, 2));
      return 0;
    }
    if (!args.out) {
      console.error('--out is required for export');
      console.error(USAGE);
      return 1;
    }
    const source = await loadSource(args.source, args.url);
    const dfrw = exportFromBuffer(source);
    await writeFile(args.out, dfrw);
    console.log(`wrote ${args.out} (${dfrw.length} bytes)`);
    return 0;
  } catch (err) {
    if (err instanceof NetworkError) {
      console.error(`network error: ${err.message}`);
      return 2;
    }
    if (err instanceof IntegrityError || err instanceof SafetensorsError) {
      console.error(`integrity error: ${err.message}`);
      return 3;
    }
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop() ?? '');
if (invokedDirectly) {
  run(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
