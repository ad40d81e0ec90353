/// <reference types="vitest/config" />
import { defineConfig } from "vite";

// base "./" keeps asset URLs relative so the bundle works mounted at /ui
// as well as at the root of any static host.
export default defineConfig({
  base: "./",
  build: {
    outDir: "dist",
    emptyOutDir: true,
  },
  server: {
    // dev convenience only; the built bundle is same-origin with the API
    proxy: {
      "/api": "http://127.0.0.1:8421",
    },
  },
  test: {
    environment: "happy-dom",
  },
});
