import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    // the cpnet service does not send CORS headers; proxy instead
    proxy: {
      "/sessions": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "happy-dom",
  },
});
