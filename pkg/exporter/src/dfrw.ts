/**
 * DFRW container: writer, reader, and integrity verification.
 *
 * Layout, all integers little-endian u32:
 *
 *   magic "DFRW" | version=1 | manifest_len | manifest (UTF-8 JSON)
 *   then per tensor: name_len | name | ndim | dims[ndim] | float32 data
 *
 * The manifest carries the layer order, preprocessing mean/std, and a
 * sha256 over the tensor payloads (kernel then bias per layer, in manifest
 * order), which `verify` recomputes. A valid file ends exactly after the
 * last tensor record.
 */

import { createHash } from 'node:crypto';

export const MAGIC = 'DFRW';
export const VERSION = 1;

export interface DfrwManifest {
  layers: string[];
  mean: number[];
  std: number[];
  source_checksum: string;
}

export interface DfrwTensor {
  name: string;
  shape: number[];
  data: Float32Array;
}

export class IntegrityError extends Error {}

export function checksumOf(tensors: DfrwTensor[]): string {
  const hash = createHash('sha256');
  for (const t of tensors) {
    hash.update(Buffer.from(t.data.buffer, t.data.byteOffset, t.data.byteLength));
  }
  return `sha256:${hash.digest('hex')}`;
}

export function encodeDfrw(manifest: DfrwManifest, tensors: DfrwTensor[]): Buffer {
  const chunks: Buffer[] = [];
  const u32 = (value: number) => {
    const b = Buffer.alloc(4);
    b.writeUInt32LE(value);
    return b;
  };
  chunks.push(Buffer.from(MAGIC, 'ascii'));
  chunks.push(u32(VERSION));
  const manifestJson = Buffer.from(JSON.stringify(manifest), 'utf-8');
  chunks.push(u32(manifestJson.length));
  chunks.push(manifestJson);
  for (const t of tensors) {
    const name = Buffer.from(t.name, 'utf-8');
    chunks.push(u32(name.length));
    chunks.push(name);
    chunks.push(u32(t.shape.length));
    for (const d of t.shape) chunks.push(u32(d));
    const count = t.shape.reduce((a, b) => a * b, 1);
    if (count !== t.data.length) {
      throw new IntegrityError(
        `tensor ${t.name}: shape [${t.shape}] does not match ${t.data.length} values`,
      );
    }
    chunks.push(Buffer.from(t.data.buffer, t.data.byteOffset, t.data.byteLength));
  }
  return Buffer.concat(chunks);
}

export function decodeDfrw(buffer: Buffer): { manifest: DfrwManifest; tensors: DfrwTensor[] } {
  let offset = 0;
  const need = (count: number, what: string) => {
    if (offset + count > buffer.length) {
      throw new IntegrityError(
        `truncated file: needed ${count} bytes for ${what} at byte offset ${offset}, ` +
          `file has ${buffer.length}`,
      );
    }
  };
  const u32 = (what: string) => {
    need(4, what);
    const value = buffer.readUInt32LE(offset);
    offset += 4;
    return value;
  };

  need(4, 'magic');
  const magic = buffer.subarray(0, 4).toString('ascii');
  offset = 4;
  if (magic !== MAGIC) {
    throw new IntegrityError(`bad magic ${JSON.stringify(magic)}, expected ${MAGIC}`);
  }
  const version = u32('version');
  if (version !== VERSION) {
    throw new IntegrityError(`unsupported version ${version}, expected ${VERSION}`);
  }
  const manifestLen = u32('manifest length');
  need(manifestLen, 'manifest');
  let manifest: DfrwManifest;
  try {
    manifest = JSON.parse(buffer.subarray(offset, offset + manifestLen).toString('utf-8'));
  } catch (err) {
    throw new IntegrityError(`manifest is not valid JSON at byte offset ${offset}: ${err}`);
  }
  offset += manifestLen;

  const tensors: DfrwTensor[] = [];
  while (offset < buffer.length) {
    const nameLen = u32('tensor name length');
    need(nameLen, 'tensor name');
    const name = buffer.subarray(offset, offset + nameLen).toString('utf-8');
    offset += nameLen;
    const ndim = u32(`ndim of ${name}`);
    if (ndim < 1 || ndim > 4) {
      throw new IntegrityError(`tensor ${name}: unsupported ndim ${ndim} at byte offset ${offset - 4}`);
    }
    const shape: number[] = [];
    for (let i = 0; i < ndim; i++) shape.push(u32(`dim ${i} of ${name}`));
    const count = shape.reduce((a, b) => a * b, 1);
    need(count * 4, `data of ${name}`);
    const aligned = new Uint8Array(count * 4);
    aligned.set(buffer.subarray(offset, offset + count * 4));
    offset += count * 4;
    tensors.push({ name, shape, data: new Float32Array(aligned.buffer) });
  }
  return { manifest, tensors };
}

/** Full structural + checksum verification; throws IntegrityError. */
export function verifyDfrw(buffer: Buffer): DfrwManifest {
  const { manifest, tensors } = decodeDfrw(buffer);
  if (!Array.isArray(manifest.layers) || manifest.layers.length === 0) {
    throw new IntegrityError('manifest lacks a layer list');
  }
  if (manifest.mean?.length !== 3 || manifest.std?.length !== 3) {
    throw new IntegrityError('manifest preprocessing constants must hold 3 values each');
  }
  if (tensors.length !== 2 * manifest.layers.length) {
    throw new IntegrityError(
      `expected ${2 * manifest.layers.length} tensor records, found ${tensors.length}`,
    );
  }
  manifest.layers.forEach((layer, i) => {
    const kernel = tensors[2 * i];
    const bias = tensors[2 * i + 1];
    if (kernel.name !== layer || bias.name !== layer) {
      throw new IntegrityError(
        `records ${kernel.name}/${bias.name} out of order, expected ${layer}`,
      );
    }
    if (kernel.shape.length !== 4 || bias.shape.length !== 1) {
      throw new IntegrityError(`layer ${layer}: kernel must be 4-d and bias 1-d`);
    }
  });
  const checksum = checksumOf(tensors);
  if (checksum !== manifest.source_checksum) {
    throw new IntegrityError(
      `checksum mismatch: manifest says ${manifest.source_checksum}, data hashes to ${checksum}`,
    );
  }
  return manifest;
}
