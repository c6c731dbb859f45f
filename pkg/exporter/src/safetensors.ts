/**
 * Minimal safetensors reader/writer for float32 checkpoints.
 *
 * Layout: u64 LE header length, UTF-8 JSON header mapping tensor names to
 * { dtype, shape, data_offsets } (offsets relative to the data block that
 * follows the header), then the raw data block.
 */

export interface TensorView {
  name: string;
  dtype: string;
  shape: number[];
  /** float32 view over the tensor bytes (only valid for dtype F32) */
  data: Float32Array;
}

export class SafetensorsError extends Error {}

export function parseSafetensors(buffer: Buffer): Map<string, TensorView> {
  if (buffer.length < 8) {
    throw new SafetensorsError(`file too short for a safetensors header (${buffer.length} bytes)`);
  }
  const headerLen = Number(buffer.readBigUInt64LE(0));
  if (8 + headerLen > buffer.length) {
    throw new SafetensorsError(
      `header length ${headerLen} exceeds file size ${buffer.length}`,
    );
  }
  let header: Record<string, { dtype: string; shape: number[]; data_offsets: [number, number] }>;
  try {
    header = JSON.parse(buffer.subarray(8, 8 + headerLen).toString('utf-8'));
  } catch (err) {
    throw new SafetensorsError(`header is not valid JSON: ${err}`);
  }
  const dataStart = 8 + headerLen;
  const tensors = new Map<string, TensorView>();
  for (const [name, meta] of Object.entries(header)) {
    if (name === '__metadata__') continue;
    const [begin, end] = meta.data_offsets;
    if (dataStart + end > buffer.length) {
      throw new SafetensorsError(`tensor ${name} extends past end of file`);
    }
    if (meta.dtype !== 'F32') {
      throw new SafetensorsError(`tensor ${name} has dtype ${meta.dtype}, expected F32`);
    }
    const bytes = buffer.subarray(dataStart + begin, dataStart + end);
    const expected = meta.shape.reduce((a, b) => a * b, 1) * 4;
    if (bytes.length !== expected) {
      throw new SafetensorsError(
        `tensor ${name}: ${bytes.length} bytes for shape [${meta.shape}] (expected ${expected})`,
      );
    }
    // copy to guarantee 4-byte alignment for the Float32Array view
    const aligned = new Uint8Array(bytes.length);
    aligned.set(bytes);
    tensors.set(name, {
      name,
      dtype: meta.dtype,
      shape: meta.shape,
      data: new Float32Array(aligned.buffer),
    });
  }
  return tensors;
}

export function writeSafetensors(
  tensors: { name: string; shape: number[]; data: Float32Array }[],
): Buffer {
  const header: Record<string, unknown> = {};
  let offset = 0;
  const blocks: Buffer[] = [];
  for (const t of tensors) {
    const bytes = Buffer.from(t.data.buffer, t.data.byteOffset, t.data.byteLength);
    header[t.name] = {
      dtype: 'F32',
      shape: t.shape,
      data_offsets: [offset, offset + bytes.length],
    };
    offset += bytes.length;
    blocks.push(bytes);
  }
  const headerJson = Buffer.from(JSON.stringify(header), 'utf-8');
  const lenBuf = Buffer.alloc(8);
  lenBuf.writeBigUInt64LE(BigInt(headerJson.length));
  return Buffer.concat([lenBuf, headerJson, ...blocks]);
}
