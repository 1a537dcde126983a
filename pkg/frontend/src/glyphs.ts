// Optional sign-id -> image-path mapping. Users who have glyph art drop a
// glyphs.json next to the UI assets; without it every sign renders as its
// numeric id. No art ships with the repo.

export type GlyphMap = Readonly<Record<string, string>>;

export async function loadGlyphMap(
  baseUrl = "",
  fetchImpl: typeof fetch = fetch,
): Promise<GlyphMap | null> {
  try {
    const response = await fetchImpl(`${baseUrl}/glyphs.json`);
    if (!response.ok) return null;
    const raw = (await response.json()) as unknown;
    if (raw === null || typeof raw !== "object" || Array.isArray(raw)) return null;
    const map: Record<string, string> = {};
    for (const [key, value] of Object.entries(raw)) {
      if (/^\d+$/.test(key) && typeof value === "string") map[key] = value;
    }
    return Object.keys(map).length > 0 ? map : null;
  } catch {
    return null;
  }
}

/** Image path for a sign, or null to fall back to the numeric id. */
export function glyphSrc(glyphs: GlyphMap | null, sign: number): string | null {
  if (!glyphs) return null;
  return glyphs[String(sign)] ?? null;
}
